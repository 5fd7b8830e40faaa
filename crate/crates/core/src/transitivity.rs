//! Transitivity checkers: supercyclic transitivity through a witness search
//! x − z ∈ W, αTz − y ∈ W; strict transitivity; the completion operator
//! that makes B(X) strictly transitive; the non-strictly-transitive set
//! Γ_xy and its perturbation trick; and the factorization hypothesis
//! T = A·S.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::families::{FamilyKind, OperatorFamily};
use crate::numerics::{
    least_squares_scalar, projective_distance, unit_distance, CVector, DenseOperator,
    ToleranceConfig,
};
use crate::report::Verdict;

// Upper bound on low-discrepancy perturbations tried per pair.
const MAX_Z_SAMPLES: usize = 64;

const PRIMES: [u32; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131,
];

fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut out = 0.0;
    let mut f = inv_base;
    while n > 0 {
        out += f * (n % base) as f64;
        n /= base;
        f *= inv_base;
    }
    out
}

/// Deterministic Halton points of the closed ball of radius `radius`
/// around `x`; sample `i` (1-based) uses the radical inverses of `i`.
fn halton_perturbations(x: &CVector, radius: f64, count: usize) -> Vec<CVector> {
    let dim = x.dim();
    let real_dim = 2 * dim;
    (1..=count as u64)
        .map(|i| {
            let coords: Vec<f64> = (0..real_dim)
                .map(|k| 2.0 * radical_inverse(i, PRIMES[k % PRIMES.len()] as u64) - 1.0)
                .collect();
            let u: Vec<Complex64> = coords
                .chunks(2)
                .map(|p| Complex64::new(p[0], p[1]))
                .collect();
            let u = CVector::new(u).expect("dim ≥ 2");
            let n = u.norm();
            let shrink = if n > 1.0 { 1.0 / n } else { 1.0 };
            x.add_scaled(Complex64::new(radius * shrink * (1.0 - 1e-12), 0.0), &u)
        })
        .collect()
}

fn check_nonzero(x: &CVector, cfg: &ToleranceConfig) -> Result<()> {
    let n = x.norm();
    if n <= cfg.zero_cutoff {
        return Err(LabError::ZeroVector { norm: n });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitivePairReport {
    pub success: bool,
    /// Best member found, with the z and α that go with it.
    pub member: usize,
    pub z: CVector,
    pub alpha: Complex64,
    /// Projective distance from y to T·z.
    pub distance: f64,
    /// ‖α·T·z − y‖.
    pub residual: f64,
    pub z_tried: usize,
}

/// Searches z within `w_radius` of x and T ∈ Γ with α·T·z within
/// `w_radius` of y. Tries z = x first, then any `extra_z` candidates inside
/// the ball, then deterministic Halton perturbations.
pub fn transitive_pair_test_with_candidates(
    g: &OperatorFamily,
    x: &CVector,
    y: &CVector,
    w_radius: f64,
    extra_z: &[CVector],
    cfg: &ToleranceConfig,
) -> Result<TransitivePairReport> {
    check_nonzero(x, cfg)?;
    check_nonzero(y, cfg)?;
    if !(w_radius > 0.0 && w_radius.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "w_radius must be positive, got {w_radius}"
        )));
    }
    for v in [x, y].into_iter().chain(extra_z) {
        if v.dim() != g.dim() {
            return Err(LabError::Dimension {
                expected: g.dim(),
                found: v.dim(),
            });
        }
    }
    let members = g.enumerate(cfg.budget);
    let ny = y.norm();
    let y_unit = y.scale(Complex64::new(1.0 / ny, 0.0));
    let threshold = w_radius / ny;
    let sample_count = (cfg.budget / members.len().max(1)).clamp(1, MAX_Z_SAMPLES);

    let mut zs = vec![x.clone()];
    zs.extend(
        extra_z
            .iter()
            .filter(|z| (*z - x).norm() <= w_radius)
            .cloned(),
    );
    zs.extend(halton_perturbations(x, w_radius, sample_count.saturating_sub(1)));

    let mut best: Option<(f64, usize, usize)> = None;
    let mut z_tried = 0;
    'outer: for (zi, z) in zs.iter().enumerate() {
        z_tried += 1;
        for (k, t) in members.iter().enumerate() {
            let tz = t.apply_unchecked(z);
            let d = unit_distance(y_unit.entries(), tz.entries(), cfg.zero_cutoff);
            if best.map_or(true, |(bd, _, _)| d < bd) {
                best = Some((d, k, zi));
            }
            if d <= threshold {
                break 'outer;
            }
        }
    }
    let (distance, member, zi) = best.expect("at least one member and one z");
    let z = zs[zi].clone();
    let tz = members[member].apply_unchecked(&z);
    let alpha = least_squares_scalar(y, &tz);
    let residual = (&tz.scale(alpha) - y).norm();
    Ok(TransitivePairReport {
        success: distance <= threshold,
        member,
        z,
        alpha,
        distance,
        residual,
        z_tried,
    })
}

/// [`transitive_pair_test_with_candidates`] without extra candidates.
pub fn transitive_pair_test(
    g: &OperatorFamily,
    x: &CVector,
    y: &CVector,
    w_radius: f64,
    cfg: &ToleranceConfig,
) -> Result<TransitivePairReport> {
    transitive_pair_test_with_candidates(g, x, y, w_radius, &[], cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub member: usize,
    pub alpha: Complex64,
    pub distance: f64,
    /// ‖α·T·x − y‖/‖y‖.
    pub relative_residual: f64,
    pub connected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrictReport {
    pub verdict: Verdict,
    pub max_residual: f64,
    pub pairs: Vec<PairWitness>,
    pub failing: Vec<usize>,
}

/// PASS when every pair (x, y) is connected exactly, α·T·x = y, up to
/// `tol_residual`.
pub fn strict_transitivity_test(
    g: &OperatorFamily,
    pairs: &[(CVector, CVector)],
    cfg: &ToleranceConfig,
) -> Result<StrictReport> {
    let members = g.enumerate(cfg.budget);
    let mut witnesses = Vec::with_capacity(pairs.len());
    let mut failing = Vec::new();
    let mut max_residual: f64 = 0.0;
    for (i, (x, y)) in pairs.iter().enumerate() {
        check_nonzero(x, cfg)?;
        check_nonzero(y, cfg)?;
        if x.dim() != g.dim() || y.dim() != g.dim() {
            return Err(LabError::Dimension {
                expected: g.dim(),
                found: if x.dim() != g.dim() { x.dim() } else { y.dim() },
            });
        }
        let ny = y.norm();
        let y_unit = y.scale(Complex64::new(1.0 / ny, 0.0));
        let mut best = (f64::INFINITY, 0usize);
        for (k, t) in members.iter().enumerate() {
            let d = unit_distance(y_unit.entries(), t.apply_unchecked(x).entries(), cfg.zero_cutoff);
            if d < best.0 {
                best = (d, k);
            }
        }
        let tx = members[best.1].apply_unchecked(x);
        let alpha = least_squares_scalar(y, &tx);
        let relative_residual = (&tx.scale(alpha) - y).norm() / ny;
        let connected = best.0 <= cfg.tol_residual && relative_residual <= cfg.tol_residual;
        if !connected {
            failing.push(i);
        }
        max_residual = max_residual.max(relative_residual);
        witnesses.push(PairWitness {
            member: best.1,
            alpha,
            distance: best.0,
            relative_residual,
            connected,
        });
    }
    Ok(StrictReport {
        verdict: Verdict::from_bool(failing.is_empty()),
        max_residual,
        pairs: witnesses,
        failing,
    })
}

/// T = I + (y − x)·x*/‖x‖², which sends x to y.
pub fn completion_operator(x: &CVector, y: &CVector) -> Result<DenseOperator> {
    if x.dim() != y.dim() {
        return Err(LabError::Dimension {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    let nx2 = x.norm_sqr();
    if !(nx2 > 0.0) || !nx2.is_finite() {
        return Err(LabError::ZeroVector { norm: nx2.sqrt() });
    }
    let diff = y - x;
    let rank_one = DenseOperator::outer(&diff, x).scale(Complex64::new(1.0 / nx2, 0.0));
    Ok(&DenseOperator::identity(x.dim()) + &rank_one)
}

/// The family of completion operators, one per (x, y) pair.
pub fn completion_oracle_family(pairs: &[(CVector, CVector)]) -> Result<OperatorFamily> {
    OperatorFamily::finite(
        pairs
            .iter()
            .map(|(x, y)| completion_operator(x, y))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// True when T·x and y are linearly independent. A zero T·x is dependent
/// with y.
pub fn gamma_xy_membership(
    t: &DenseOperator,
    x: &CVector,
    y: &CVector,
    cfg: &ToleranceConfig,
) -> Result<bool> {
    check_nonzero(x, cfg)?;
    check_nonzero(y, cfg)?;
    if projective_distance(y, x, cfg)? <= cfg.tol_residual {
        return Err(LabError::Precondition(
            "x and y must be linearly independent".into(),
        ));
    }
    let tx = t.apply(x)?;
    if tx.norm() <= cfg.zero_cutoff {
        return Ok(false);
    }
    Ok(projective_distance(y, &tx, cfg)? > cfg.tol_residual)
}

/// S + I/n for the smallest n ≥ 1 that lands in Γ_xy.
pub fn gamma_xy_perturb(
    s: &DenseOperator,
    x: &CVector,
    y: &CVector,
    cfg: &ToleranceConfig,
) -> Result<DenseOperator> {
    let ident = DenseOperator::identity(s.dim());
    // (S + I/n)x ∈ span{y} for two distinct n would put x in span{y}, so
    // at most one n fails in exact arithmetic.
    for n in 1..=s.dim() + 1 {
        let candidate = s + &ident.scale(Complex64::new(1.0 / n as f64, 0.0));
        if gamma_xy_membership(&candidate, x, y, cfg)? {
            return Ok(candidate);
        }
    }
    Err(LabError::Numerical(
        "no perturbation S + I/n left span{y} within dim + 1 steps".into(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub verdict: Verdict,
    pub pairs_checked: usize,
    /// Pairs (i, j), i < j, with neither T_i = A·T_j nor T_j = A·T_i
    /// witnessed by a member A.
    pub unwitnessed: Vec<(usize, usize)>,
    pub max_residual: f64,
}

fn relative_factor_residual(t: &DenseOperator, a: &DenseOperator, s: &DenseOperator) -> f64 {
    let nt = t.norm_fro();
    let r = (t - &(a * s)).norm_fro();
    if nt == 0.0 {
        r
    } else {
        r / nt
    }
}

/// For every pair of distinct members looks for A ∈ Γ with the later one
/// equal to A times the earlier one (in either order). Semigroup grids use
/// index arithmetic: T_{ih} = T_{(i−j)h}·T_{jh}.
pub fn factorization_property_test(g: &OperatorFamily, cfg: &ToleranceConfig) -> FactorizationReport {
    let members = g.enumerate(cfg.budget);
    let m = members.len();
    let mut unwitnessed = Vec::new();
    let mut pairs_checked = 0;
    let mut max_residual: f64 = 0.0;
    let semigroup = matches!(g.kind(), FamilyKind::SemigroupGrid(_));
    for i in 0..m {
        for j in (i + 1)..m {
            pairs_checked += 1;
            if semigroup {
                let r = relative_factor_residual(&members[j], &members[j - i], &members[i]);
                max_residual = max_residual.max(r);
                if r > cfg.tol_residual {
                    unwitnessed.push((i, j));
                }
                continue;
            }
            let mut found = None;
            for a in &members {
                let r1 = relative_factor_residual(&members[j], a, &members[i]);
                let r2 = relative_factor_residual(&members[i], a, &members[j]);
                let r = r1.min(r2);
                if r <= cfg.tol_residual {
                    found = Some(r);
                    break;
                }
            }
            match found {
                Some(r) => max_residual = max_residual.max(r),
                None => unwitnessed.push((i, j)),
            }
        }
    }
    FactorizationReport {
        verdict: Verdict::from_bool(unwitnessed.is_empty()),
        pairs_checked,
        unwitnessed,
        max_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn halton_points_stay_in_ball() {
        let x = CVector::from_real(&[1.0, -1.0, 0.5]).unwrap();
        let pts = halton_perturbations(&x, 0.2, 50);
        assert_eq!(pts.len(), 50);
        for p in &pts {
            assert!((p - &x).norm() <= 0.2);
        }
        assert_eq!(pts, halton_perturbations(&x, 0.2, 50));
        assert_ne!(pts[0], pts[1]);
    }

    #[test]
    fn completion_operator_maps_x_to_y() {
        let e1 = CVector::basis(2, 0);
        let e2 = CVector::basis(2, 1);
        let t = completion_operator(&e1, &e2).unwrap();
        assert_eq!(t.apply(&e1).unwrap(), e2);
        let x = CVector::from_real(&[1.0, 2.0, -1.0]).unwrap();
        assert_eq!(completion_operator(&x, &x).unwrap(), DenseOperator::identity(3));

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let x = CVector::random_gaussian(6, &mut rng);
            let y = CVector::random_gaussian(6, &mut rng);
            let t = completion_operator(&x, &y).unwrap();
            assert!((&t.apply(&x).unwrap() - &y).norm() <= 1e-12 * (1.0 + y.norm()));
        }
        assert!(matches!(
            completion_operator(&CVector::zeros(2), &e1),
            Err(LabError::ZeroVector { .. })
        ));
    }

    #[test]
    fn completion_family_is_transitive_with_z_equal_x() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = CVector::random_gaussian(3, &mut rng);
        let y = CVector::random_gaussian(3, &mut rng);
        let fam = completion_oracle_family(&[(x.clone(), y.clone())]).unwrap();
        let report = transitive_pair_test(&fam, &x, &y, 1e-3, &cfg()).unwrap();
        assert!(report.success);
        assert_eq!(report.z, x);
        assert!(report.residual <= 1e-10);
    }

    #[test]
    fn identity_is_not_transitive_between_axes() {
        let fam = OperatorFamily::identity(2);
        let report =
            transitive_pair_test(&fam, &CVector::basis(2, 0), &CVector::basis(2, 1), 0.1, &cfg())
                .unwrap();
        assert!(!report.success);
        assert!(report.z_tried > 1);
    }

    #[test]
    fn diag_grid_reaches_exact_member() {
        let fam = OperatorFamily::diagonal_grid(10.0, 0.5).unwrap();
        let x = CVector::from_real(&[1.0, 1.0]).unwrap();
        let y = CVector::from_real(&[1.0, 5.0]).unwrap();
        let report = transitive_pair_test(&fam, &x, &y, 0.05, &cfg()).unwrap();
        assert!(report.success);
        assert_eq!(report.z, x);
        assert_eq!(
            fam.member(report.member).unwrap(),
            DenseOperator::diagonal(&[c(1.0, 0.0), c(5.0, 0.0)])
        );
        assert!((report.alpha - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn strict_transitivity_cases() {
        let e1 = CVector::basis(2, 0);
        let e2 = CVector::basis(2, 1);
        let id = strict_transitivity_test(&OperatorFamily::identity(2), &[(e1.clone(), e2.clone())], &cfg())
            .unwrap();
        assert_eq!(id.verdict, Verdict::Fail);

        let grid = OperatorFamily::diagonal_grid(10.0, 0.5).unwrap();
        let report = strict_transitivity_test(&grid, &[(e2.clone(), e1.clone())], &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        assert_eq!(report.failing, vec![0]);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pairs: Vec<(CVector, CVector)> = (0..10)
            .map(|_| (CVector::random_gaussian(4, &mut rng), CVector::random_gaussian(4, &mut rng)))
            .collect();
        let oracle = completion_oracle_family(&pairs).unwrap();
        let report = strict_transitivity_test(&oracle, &pairs, &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(report.max_residual <= 1e-10);
    }

    #[test]
    fn gamma_xy_membership_cases() {
        let e1 = CVector::basis(2, 0);
        let e2 = CVector::basis(2, 1);
        assert!(gamma_xy_membership(&DenseOperator::identity(2), &e1, &e2, &cfg()).unwrap());

        let x = CVector::from_real(&[1.0, 2.0, 0.0]).unwrap();
        let y = CVector::from_real(&[0.0, 1.0, -1.0]).unwrap();
        let s = completion_operator(&x, &y.scale(c(2.0, 0.0))).unwrap();
        assert!(!gamma_xy_membership(&s, &x, &y, &cfg()).unwrap());
        for n in 1..5 {
            let t = &completion_operator(&x, &y).unwrap()
                + &DenseOperator::identity(3).scale(c(1.0 / n as f64, 0.0));
            assert!(gamma_xy_membership(&t, &x, &y, &cfg()).unwrap());
        }
        assert!(!gamma_xy_membership(&DenseOperator::zeros(3), &x, &y, &cfg()).unwrap());
        assert!(matches!(
            gamma_xy_membership(&DenseOperator::identity(2), &e1, &e1.scale(c(0.0, 3.0)), &cfg()),
            Err(LabError::Precondition(_))
        ));
    }

    #[test]
    fn gamma_xy_perturb_cases() {
        let x = CVector::from_real(&[1.0, 0.0, 1.0]).unwrap();
        let y = CVector::from_real(&[0.0, 1.0, 0.0]).unwrap();
        let s = completion_operator(&x, &y).unwrap();
        let ident = DenseOperator::identity(3);
        assert_eq!(gamma_xy_perturb(&s, &x, &y, &cfg()).unwrap(), &s + &ident);
        assert_eq!(
            gamma_xy_perturb(&DenseOperator::zeros(3), &x, &y, &cfg()).unwrap(),
            ident
        );
    }

    #[test]
    fn factorization_on_semigroup_and_gapped_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = DenseOperator::random_gaussian(3, &mut rng);
        let a = a.scale(c(1.0 / a.norm_spectral(), 0.0));
        let grid = crate::semigroups::semigroup_grid(&a, 0.1, 10).unwrap();
        let report = factorization_property_test(&grid.family(), &cfg());
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(report.max_residual <= 1e-8);

        // {T_0, T_1, T_3}: T_3 = A·T_1 needs the missing T_2.
        let m = grid.members();
        let gapped = OperatorFamily::finite(vec![m[0].clone(), m[1].clone(), m[3].clone()]).unwrap();
        let report = factorization_property_test(&gapped, &cfg());
        assert_eq!(report.verdict, Verdict::Fail);
        assert_eq!(report.unwitnessed, vec![(1, 2)]);
    }

    #[test]
    fn factorization_on_multiplicative_group() {
        // {diag(1, ω^j)} for 12th roots of unity is closed under division.
        let members: Vec<DenseOperator> = (0..12)
            .map(|j| {
                let w = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / 12.0);
                DenseOperator::diagonal(&[c(1.0, 0.0), w])
            })
            .collect();
        let fam = OperatorFamily::finite(members).unwrap();
        let report = factorization_property_test(&fam, &cfg());
        assert_eq!(report.verdict, Verdict::Pass);
        assert_eq!(report.pairs_checked, 66);
    }
}
