use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use supercyclic::criterion::{constructive_witnesses, rolewicz_truncated_family, verify_criterion};
use supercyclic::density::{eps_supercyclic_test, BallBasis, ProbeSet};
use supercyclic::families::{IntertwiningMap, OperatorFamily};
use supercyclic::numerics::{matrix_exponential, projective_distance};
use supercyclic::semigroups::{regularized_group_grid, rescale_semigroup, semigroup_grid, RescaleParams};
use supercyclic::transitivity::{
    completion_oracle_family, factorization_property_test, strict_transitivity_test,
    transitive_pair_test,
};
use supercyclic::{CVector, Complex64, DenseOperator, ToleranceConfig};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_scalar(r: &mut ChaCha8Rng) -> Complex64 {
    let modulus = 10f64.powf(r.random_range(-3.0..3.0));
    Complex64::from_polar(modulus, r.random_range(0.0..std::f64::consts::TAU))
}

fn random_family(r: &mut ChaCha8Rng, dim: usize, members: usize) -> OperatorFamily {
    OperatorFamily::finite((0..members).map(|_| DenseOperator::random_gaussian(dim, r)).collect())
        .unwrap()
}

fn with_spectral_norm(a: DenseOperator, norm: f64) -> DenseOperator {
    let s = a.norm_spectral();
    a.scale(c(norm / s, 0.0))
}

// Brute-force minimum of ‖u/‖u‖ − γ·v‖ over a polar grid of γ, refined twice.
fn brute_force_distance(u: &CVector, v: &CVector) -> f64 {
    let unit = u.scale(c(1.0 / u.norm(), 0.0));
    let eval = |g: Complex64| (&unit - &v.scale(g)).norm();
    let scale = 1.0 / v.norm();
    let (mut best_r, mut best_t) = (0.0, 0.0);
    let mut best = eval(c(0.0, 0.0));
    let (mut r_lo, mut r_hi, mut t_lo, mut t_hi) = (0.0, 2.0 * scale, 0.0, std::f64::consts::TAU);
    for _ in 0..4 {
        for i in 0..=80 {
            for j in 0..=80 {
                let r = r_lo + (r_hi - r_lo) * i as f64 / 80.0;
                let t = t_lo + (t_hi - t_lo) * j as f64 / 80.0;
                let d = eval(Complex64::from_polar(r, t));
                if d < best {
                    best = d;
                    best_r = r;
                    best_t = t;
                }
            }
        }
        let dr = (r_hi - r_lo) / 40.0;
        let dt = (t_hi - t_lo) / 40.0;
        r_lo = (best_r - dr).max(0.0);
        r_hi = best_r + dr;
        t_lo = best_t - dt;
        t_hi = best_t + dt;
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projective_distance_ignores_scaling(seed: u64, dim in 2usize..=8) {
        let mut r = rng(seed);
        let u = CVector::random_gaussian(dim, &mut r);
        let v = CVector::random_gaussian(dim, &mut r);
        let (a, b) = (random_scalar(&mut r), random_scalar(&mut r));
        let d = projective_distance(&u, &v, &cfg()).unwrap();
        let scaled = projective_distance(&u.scale(a), &v.scale(b), &cfg()).unwrap();
        prop_assert!((d - scaled).abs() <= 1e-12, "{d} vs {scaled}");
    }

    #[test]
    fn projective_distance_satisfies_pythagoras(seed: u64, dim in 2usize..=8) {
        let mut r = rng(seed);
        let u = CVector::random_gaussian(dim, &mut r);
        let v = CVector::random_gaussian(dim, &mut r);
        let d = projective_distance(&u, &v, &cfg()).unwrap();
        let cos2 = u.dot(&v).norm_sqr() / (u.norm_sqr() * v.norm_sqr());
        prop_assert!((d * d + cos2 - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn projective_distance_matches_brute_force(seed: u64, dim in 2usize..=8) {
        let mut r = rng(seed);
        let u = CVector::random_gaussian(dim, &mut r);
        let v = CVector::random_gaussian(dim, &mut r);
        let d = projective_distance(&u, &v, &cfg()).unwrap();
        prop_assert!((d - brute_force_distance(&u, &v)).abs() <= 1e-6);
    }

    // The product of two exponentials carries rounding of order
    // ‖e^{tA}‖·‖e^{sA}‖, so the residual is measured on that scale.
    #[test]
    fn exponential_semigroup_law(seed: u64, dim in 2usize..=6, t in -2.0f64..2.0, s in -2.0f64..2.0) {
        let mut r = rng(seed);
        let a = with_spectral_norm(DenseOperator::random_gaussian(dim, &mut r), r.random_range(0.1..5.0));
        let et = matrix_exponential(&a, c(t, 0.0)).unwrap();
        let es = matrix_exponential(&a, c(s, 0.0)).unwrap();
        let ets = matrix_exponential(&a, c(t + s, 0.0)).unwrap();
        let residual = (&(&et * &es) - &ets).norm_fro();
        let scale = (et.norm_fro() * es.norm_fro()).max(1.0);
        prop_assert!(residual / scale <= 1e-8, "{residual} at scale {scale}");
    }

    #[test]
    fn scaled_family_has_identical_distances(seed: u64, dim in 2usize..=4) {
        let mut r = rng(seed);
        let g = random_family(&mut r, dim, 12);
        let scalars: Vec<Complex64> = (0..12).map(|_| random_scalar(&mut r)).collect();
        let scaled = g.scale_members(&scalars).unwrap();
        let x = CVector::random_gaussian(dim, &mut r);
        let probes = ProbeSet::generate(dim, 30, seed).unwrap();
        let a = eps_supercyclic_test(&g, &x, &probes, &cfg()).unwrap();
        let b = eps_supercyclic_test(&scaled, &x, &probes, &cfg()).unwrap();
        for (p, q) in a.per_probe.iter().zip(&b.per_probe) {
            prop_assert!((p.distance - q.distance).abs() <= 1e-12);
        }
        prop_assert_eq!(a.verdict, b.verdict);
    }

    #[test]
    fn scalar_multiples_share_the_verdict(seed: u64, eps in 0.05f64..0.9) {
        let mut r = rng(seed);
        let g = random_family(&mut r, 2, 40);
        let x = CVector::random_gaussian(2, &mut r);
        let alpha = random_scalar(&mut r);
        let probes = ProbeSet::generate(2, 24, seed).unwrap();
        let cfg = cfg().with_eps(eps);
        let a = eps_supercyclic_test(&g, &x, &probes, &cfg).unwrap();
        let b = eps_supercyclic_test(&g, &x.scale(alpha), &probes, &cfg).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        for (p, q) in a.per_probe.iter().zip(&b.per_probe) {
            prop_assert!((p.distance - q.distance).abs() <= 1e-12);
        }
    }

    #[test]
    fn passing_survives_larger_eps(seed: u64, eps in 0.05f64..0.9, extra in 0.0f64..0.5) {
        let mut r = rng(seed);
        let g = random_family(&mut r, 2, 60);
        let x = CVector::random_gaussian(2, &mut r);
        let probes = ProbeSet::generate(2, 24, seed).unwrap();
        let tight = eps_supercyclic_test(&g, &x, &probes, &cfg().with_eps(eps)).unwrap();
        let loose = eps_supercyclic_test(&g, &x, &probes, &cfg().with_eps(eps + extra)).unwrap();
        if tight.verdict.is_pass() {
            prop_assert!(loose.verdict.is_pass());
        }
    }

    #[test]
    fn worst_case_does_not_grow_with_budget(seed: u64, small in 1usize..60, more in 0usize..60) {
        let mut r = rng(seed);
        let g = random_family(&mut r, 3, 120);
        let x = CVector::random_gaussian(3, &mut r);
        let probes = ProbeSet::generate(3, 20, seed).unwrap();
        let a = eps_supercyclic_test(&g, &x, &probes, &cfg().with_budget(small)).unwrap();
        let b = eps_supercyclic_test(&g, &x, &probes, &cfg().with_budget(small + more)).unwrap();
        prop_assert!(b.worst_case <= a.worst_case);
    }

    // For T commuting with Γ the orbit of Tx is T applied to the orbit of x,
    // so d(p, S·Tx) ≤ κ(T)·d(q, Sx) with q = T⁻¹p/‖T⁻¹p‖.
    #[test]
    fn commutant_transports_density(seed: u64) {
        let mut r = rng(seed);
        let g = OperatorFamily::diagonal_grid(3.0, 0.5).unwrap();
        let t = DenseOperator::diagonal(&[random_scalar(&mut r), random_scalar(&mut r)]);
        let t_inv = t.inverse(1e-14).unwrap();
        let kappa = t.condition_number();
        let x = CVector::random_gaussian(2, &mut r);
        let probes = ProbeSet::generate(2, 24, seed).unwrap();
        let pulled: Vec<CVector> = probes.probes().iter().map(|p| t_inv.apply(p).unwrap()).collect();
        let pulled = ProbeSet::from_vectors(pulled, &cfg()).unwrap();
        let base = eps_supercyclic_test(&g, &x, &pulled, &cfg()).unwrap();
        let moved = eps_supercyclic_test(&g, &t.apply(&x).unwrap(), &probes, &cfg()).unwrap();
        for (m, b) in moved.per_probe.iter().zip(&base.per_probe) {
            prop_assert!(m.distance <= kappa * b.distance + 1e-12);
        }
        let eps = base.worst_case + 1e-9;
        let moved = eps_supercyclic_test(&g, &t.apply(&x).unwrap(), &probes, &cfg().with_eps(kappa * eps)).unwrap();
        prop_assert!(moved.verdict.is_pass());
    }

    #[test]
    fn similarity_transfers_passing_vectors(seed: u64) {
        let mut r = rng(seed);
        let g = random_family(&mut r, 2, 50);
        let phi = DenseOperator::random_gaussian(2, &mut r);
        let map = IntertwiningMap::new(phi.clone(), &cfg());
        prop_assume!(map.invertible && map.condition_number() < 1e3);
        let conjugated = g.conjugate_similar(&map).unwrap();
        let kappa = map.condition_number();
        let phi_inv = map.inverse().unwrap();
        let x = CVector::random_gaussian(2, &mut r);
        let probes = ProbeSet::generate(2, 24, seed).unwrap();
        let pulled: Vec<CVector> = probes.probes().iter().map(|p| phi_inv.apply(p).unwrap()).collect();
        let pulled = ProbeSet::from_vectors(pulled, &cfg()).unwrap();
        let eps = 0.5;
        let base = eps_supercyclic_test(&g, &x, &pulled, &cfg().with_eps(eps)).unwrap();
        let moved = eps_supercyclic_test(&conjugated, &phi.apply(&x).unwrap(), &probes, &cfg().with_eps(eps * kappa)).unwrap();
        for (m, b) in moved.per_probe.iter().zip(&base.per_probe) {
            prop_assert!(m.distance <= kappa * b.distance * (1.0 + 1e-9) + 1e-12);
        }
        if base.verdict.is_pass() {
            prop_assert!(moved.verdict.is_pass());
        }
    }

    // A product probe (a, b)/√2 within ε of the product orbit puts a within
    // √2·ε of the first component orbit.
    #[test]
    fn direct_sum_projects_to_components(seed: u64) {
        let mut r = rng(seed);
        let g1 = random_family(&mut r, 2, 10);
        let g2 = random_family(&mut r, 2, 10);
        let sum = OperatorFamily::direct_sum(&[g1.clone(), g2.clone()]).unwrap();
        let (x1, x2) = (CVector::random_gaussian(2, &mut r), CVector::random_gaussian(2, &mut r));
        let a: Vec<CVector> = (0..8).map(|_| CVector::random_unit(2, &mut r)).collect();
        let b: Vec<CVector> = (0..8).map(|_| CVector::random_unit(2, &mut r)).collect();
        let product: Vec<CVector> = a.iter().zip(&b).map(|(a, b)| CVector::concat(&[a.clone(), b.clone()])).collect();
        let eps = 0.6;
        let cfg = cfg().with_eps(eps);
        let whole = eps_supercyclic_test(&sum, &CVector::concat(&[x1.clone(), x2.clone()]),
            &ProbeSet::from_vectors(product, &cfg).unwrap(), &cfg).unwrap();
        let wide = cfg.with_eps(eps * 2f64.sqrt());
        let first = eps_supercyclic_test(&g1, &x1, &ProbeSet::from_vectors(a, &cfg).unwrap(), &wide).unwrap();
        let second = eps_supercyclic_test(&g2, &x2, &ProbeSet::from_vectors(b, &cfg).unwrap(), &wide).unwrap();
        for k in 0..8 {
            let bound = 2f64.sqrt() * whole.per_probe[k].distance + 1e-12;
            prop_assert!(first.per_probe[k].distance <= bound);
            prop_assert!(second.per_probe[k].distance <= bound);
        }
        if whole.verdict.is_pass() {
            prop_assert!(first.verdict.is_pass() && second.verdict.is_pass());
        }
    }

    #[test]
    fn removing_a_grid_member_moves_worst_case_by_at_most_a_step(seed: u64, index in 0usize..81) {
        let step = 0.5;
        let g = OperatorFamily::diagonal_grid(2.0, step).unwrap();
        let x = CVector::from_real(&[1.0, 1.0]).unwrap();
        let probes = ProbeSet::generate(2, 60, seed).unwrap();
        let full = eps_supercyclic_test(&g, &x, &probes, &cfg()).unwrap();
        let pruned = eps_supercyclic_test(&g.remove_member(index).unwrap(), &x, &probes, &cfg()).unwrap();
        // The grid contains w = 0, so min |w| = 0 in the bound.
        let change = pruned.worst_case - full.worst_case;
        prop_assert!((-1e-15..=step / (1.0f64 + 0.0).sqrt()).contains(&change), "{change}");
    }

    #[test]
    fn gdelta_agrees_with_eps_test_on_matched_balls(seed: u64, eps in 0.05f64..0.8) {
        let mut r = rng(seed);
        let dim = r.random_range(2..=3);
        let g = random_family(&mut r, dim, 40);
        let x = CVector::random_gaussian(dim, &mut r);
        let probes = ProbeSet::generate(dim, 16, seed).unwrap();
        let cfg = cfg().with_eps(eps);
        let sc = eps_supercyclic_test(&g, &x, &probes, &cfg).unwrap();
        let gd = supercyclic::density::gdelta_membership(&g, &x, &BallBasis::matched_to_probes(&probes, eps), &cfg).unwrap();
        prop_assert_eq!(sc.verdict.is_pass(), gd.overall);
    }

    #[test]
    fn strict_transitivity_implies_transitivity(seed: u64, dim in 2usize..=5, radius_exp in -10i32..0) {
        let mut r = rng(seed);
        let pairs: Vec<(CVector, CVector)> = (0..6)
            .map(|_| (CVector::random_gaussian(dim, &mut r), CVector::random_gaussian(dim, &mut r)))
            .collect();
        let g = completion_oracle_family(&pairs).unwrap();
        let strict = strict_transitivity_test(&g, &pairs, &cfg()).unwrap();
        prop_assert!(strict.verdict.is_pass());
        let radius = 10f64.powi(radius_exp).max(cfg().tol_residual);
        for (x, y) in &pairs {
            prop_assert!(transitive_pair_test(&g, x, y, radius, &cfg()).unwrap().success);
        }
    }

    #[test]
    fn similarity_preserves_strict_and_direct_transitivity(seed: u64) {
        let mut r = rng(seed);
        let pairs: Vec<(CVector, CVector)> = (0..4)
            .map(|_| (CVector::random_gaussian(3, &mut r), CVector::random_gaussian(3, &mut r)))
            .collect();
        let g = completion_oracle_family(&pairs).unwrap();
        let phi = DenseOperator::random_gaussian(3, &mut r);
        let map = IntertwiningMap::new(phi.clone(), &cfg());
        prop_assume!(map.invertible && map.condition_number() < 100.0);
        let kappa = map.condition_number();
        let conjugated = g.conjugate_similar(&map).unwrap();
        let moved: Vec<(CVector, CVector)> = pairs
            .iter()
            .map(|(x, y)| (phi.apply(x).unwrap(), phi.apply(y).unwrap()))
            .collect();
        let inflated = ToleranceConfig { tol_residual: cfg().tol_residual * kappa, ..cfg() };
        prop_assert!(strict_transitivity_test(&g, &pairs, &cfg()).unwrap().verdict.is_pass());
        prop_assert!(strict_transitivity_test(&conjugated, &moved, &inflated).unwrap().verdict.is_pass());
        let radius = 1e-3;
        for ((x, y), (mx, my)) in pairs.iter().zip(&moved) {
            let before = transitive_pair_test(&g, x, y, radius, &cfg()).unwrap();
            prop_assert!(before.success && before.z_tried == 1);
            let after_radius = radius * kappa * my.norm() / y.norm();
            prop_assert!(transitive_pair_test(&conjugated, mx, my, after_radius, &cfg()).unwrap().success);
        }
    }

    #[test]
    fn criterion_witnesses_connect_span_pairs(seed: u64) {
        let mut r = rng(seed);
        let (family, data) = rolewicz_truncated_family(12, c(2.0, 0.0)).unwrap();
        prop_assert!(verify_criterion(&family, &data, &cfg()).unwrap().verdict.is_pass());
        let combo = |r: &mut ChaCha8Rng, basis: &[CVector]| {
            basis.iter().fold(CVector::zeros(12), |acc, b| acc.add_scaled(random_scalar(r), b))
        };
        let x0 = combo(&mut r, data.x0());
        let y = combo(&mut r, data.y0());
        let radius = 10.0 * cfg().tol_residual;
        let witnesses = constructive_witnesses(&data, &x0, &y, radius);
        let report = supercyclic::transitivity::transitive_pair_test_with_candidates(
            &family, &x0, &y, radius, &witnesses, &cfg(),
        )
        .unwrap();
        prop_assert!(report.success, "distance {}", report.distance);
    }

    #[test]
    fn rescaling_alphas_scales_the_first_two_conditions(seed: u64) {
        let mut r = rng(seed);
        let (family, data) = rolewicz_truncated_family(10, c(1.5, 0.5)).unwrap();
        let factor = random_scalar(&mut r);
        let a = verify_criterion(&family, &data, &cfg()).unwrap().profile;
        let b = verify_criterion(&family, &data.rescale_alphas(factor).unwrap(), &cfg()).unwrap().profile;
        let m = factor.norm();
        for k in 0..a.indices.len() {
            prop_assert!((b.scaled_orbit[k] - m * a.scaled_orbit[k]).abs() <= 1e-12 * (1.0 + b.scaled_orbit[k]));
            prop_assert!((b.scaled_right_inverse[k] - a.scaled_right_inverse[k] / m).abs()
                <= 1e-12 * (1.0 + a.scaled_right_inverse[k] / m));
            prop_assert_eq!(a.reconstruction[k], b.reconstruction[k]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn semigroup_grids_factor_and_rescale_projectively(seed: u64, mu in -3.0f64..3.0) {
        let mut r = rng(seed);
        let a = with_spectral_norm(DenseOperator::random_gaussian(3, &mut r), r.random_range(0.1..2.0));
        let grid = semigroup_grid(&a, 0.1, 20).unwrap();
        prop_assert!(grid.law_residual() <= 1e-8);
        let f = factorization_property_test(&grid.family(), &cfg());
        prop_assert!(f.verdict.is_pass() && f.max_residual <= 1e-8);
        let rescaled = rescale_semigroup(&grid, RescaleParams { mu: c(mu, 0.0), alpha: 1.0 }).unwrap();
        let x = CVector::random_gaussian(3, &mut r);
        let probes = ProbeSet::generate(3, 40, seed).unwrap();
        let before = eps_supercyclic_test(&grid.family(), &x, &probes, &cfg()).unwrap();
        let after = eps_supercyclic_test(&rescaled, &x, &probes, &cfg()).unwrap();
        prop_assert_eq!(before.verdict, after.verdict);
        for (p, q) in before.per_probe.iter().zip(&after.per_probe) {
            prop_assert!((p.distance - q.distance).abs() <= 1e-12);
        }
    }

    #[test]
    fn diagonal_regularizer_commutes_with_every_member(seed: u64) {
        let mut r = rng(seed);
        let diag = |r: &mut ChaCha8Rng| {
            DenseOperator::diagonal(&(0..3).map(|_| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect::<Vec<_>>())
        };
        let (a, cm) = (diag(&mut r), diag(&mut r));
        let z_grid: Vec<Complex64> = std::iter::once(c(0.0, 0.0))
            .chain((0..10).map(|_| c(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0))))
            .collect();
        let g = regularized_group_grid(&a, &cm, &z_grid).unwrap();
        for m in g.members() {
            prop_assert!((&(&cm * m) - &(m * &cm)).norm_fro() <= 1e-10);
        }
    }
}

// A spiralling rotation semigroup is ε-dense at x and factors through
// itself, so sampled pairs connect at radius 2ε.
#[test]
fn factorization_and_density_give_transitivity() {
    let a = DenseOperator::diagonal(&[c(0.0, 0.0), c(1.0, 40.0)]);
    let grid = semigroup_grid(&a, 0.005, 2400).unwrap();
    let family = grid.family();
    let cfg = cfg();
    assert!(factorization_property_test(&family, &cfg).verdict.is_pass());
    let x = CVector::new(vec![c(1.0, 0.0), c((-6.0f64).exp(), 0.0)]).unwrap();
    let probes = ProbeSet::generate(2, 200, 3).unwrap();
    let sc = eps_supercyclic_test(&family, &x, &probes, &cfg).unwrap();
    assert!(sc.verdict.is_pass(), "worst {}", sc.worst_case);
    let mut r = rng(5);
    for _ in 0..20 {
        let y = CVector::random_unit(2, &mut r);
        let report = transitive_pair_test(&family, &x, &y, 2.0 * cfg.eps_density, &cfg).unwrap();
        assert!(report.success, "distance {}", report.distance);
    }
}
