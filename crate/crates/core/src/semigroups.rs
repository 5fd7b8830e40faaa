//! Uniformly sampled C0-semigroups e^{tA}, their rescaled and similar
//! versions, and entire C-regularized groups S(z) = e^{zA}·C sampled on
//! complex grids.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{eps_supercyclic_test, DensityReport, ProbeSet};
use crate::error::{LabError, Result};
use crate::families::{IntertwiningMap, OperatorFamily};
use crate::numerics::{matrix_exponential, CVector, DenseOperator, ToleranceConfig};
use crate::report::Verdict;

// Members are recomputed directly every this many steps to bound the drift
// of repeated multiplication.
const REANCHOR_EVERY: usize = 8;

/// The members e^{khA}, k = 0..=N, of the semigroup generated by A.
#[derive(Debug, Clone)]
pub struct SemigroupGrid {
    generator: DenseOperator,
    step: f64,
    count: usize,
    members: Vec<DenseOperator>,
}

impl SemigroupGrid {
    pub fn generator(&self) -> &DenseOperator {
        &self.generator
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn members(&self) -> &[DenseOperator] {
        &self.members
    }

    pub fn family(&self) -> OperatorFamily {
        OperatorFamily::from_semigroup(Arc::new(self.clone()))
    }

    /// max over k₁ + k₂ ≤ N of ‖T_{(k₁+k₂)h} − T_{k₁h}·T_{k₂h}‖.
    pub fn law_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k1 in 0..=self.count {
            for k2 in 0..=(self.count - k1) {
                let prod = &self.members[k1] * &self.members[k2];
                worst = worst.max((&self.members[k1 + k2] - &prod).norm_fro());
            }
        }
        worst
    }
}

/// Samples the semigroup generated by `a` at times 0, h, …, N·h.
pub fn semigroup_grid(a: &DenseOperator, h: f64, n: usize) -> Result<SemigroupGrid> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "semigroup step must be positive, got {h}"
        )));
    }
    if n == 0 {
        return Err(LabError::InvalidParameter(
            "semigroup grid needs at least one step".into(),
        ));
    }
    let one_step = matrix_exponential(a, Complex64::new(h, 0.0))?;
    let mut members = Vec::with_capacity(n + 1);
    members.push(DenseOperator::identity(a.dim()));
    for k in 1..=n {
        let next = if k % REANCHOR_EVERY == 0 {
            matrix_exponential(a, Complex64::new(k as f64 * h, 0.0))?
        } else {
            &members[k - 1] * &one_step
        };
        if !next.is_finite() {
            return Err(LabError::Numerical(format!(
                "semigroup member {k} is not finite"
            )));
        }
        members.push(next);
    }
    Ok(SemigroupGrid {
        generator: a.clone(),
        step: h,
        count: n,
        members,
    })
}

/// Parameters of the rescaled semigroup S_t = e^{μt}·T_{αt}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleParams {
    pub mu: Complex64,
    pub alpha: f64,
}

/// Member k is e^{μkh}·e^{αkhA}. For α ≠ 1 the grid is recomputed from the
/// generator αA on the same step.
pub fn rescale_semigroup(g: &SemigroupGrid, p: RescaleParams) -> Result<OperatorFamily> {
    if !(p.alpha > 0.0 && p.alpha.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "rescaling requires alpha > 0, got {}",
            p.alpha
        )));
    }
    let base = if p.alpha == 1.0 {
        g.clone()
    } else {
        semigroup_grid(
            &g.generator.scale(Complex64::new(p.alpha, 0.0)),
            g.step,
            g.count,
        )?
    };
    let scalars: Vec<Complex64> = (0..=g.count)
        .map(|k| (p.mu * (k as f64 * g.step)).exp())
        .collect();
    if scalars.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
        return Err(LabError::Numerical("rescaling factor overflowed".into()));
    }
    base.family().scale_members(&scalars)
}

/// The semigroup φ⁻¹·T_t·φ.
pub fn similar_semigroup(g: &SemigroupGrid, phi: &IntertwiningMap) -> Result<OperatorFamily> {
    g.family().conjugate_similar(&phi.inverted()?)
}

/// S(z) = e^{zA}·C sampled at the points of `z_grid`.
#[derive(Debug, Clone)]
pub struct RegularizedGroupGrid {
    generator: DenseOperator,
    regularizer: DenseOperator,
    z_grid: Vec<Complex64>,
    members: Vec<DenseOperator>,
    commutation_defect: f64,
}

impl RegularizedGroupGrid {
    pub fn generator(&self) -> &DenseOperator {
        &self.generator
    }

    pub fn regularizer(&self) -> &DenseOperator {
        &self.regularizer
    }

    pub fn z_grid(&self) -> &[Complex64] {
        &self.z_grid
    }

    pub fn members(&self) -> &[DenseOperator] {
        &self.members
    }

    /// ‖AC − CA‖.
    pub fn commutation_defect(&self) -> f64 {
        self.commutation_defect
    }

    pub fn family(&self) -> OperatorFamily {
        OperatorFamily::from_regularized_group(Arc::new(self.clone()))
    }

    fn index_of(&self, z: Complex64) -> Option<usize> {
        let tol = 1e-12 * (1.0 + z.norm());
        self.z_grid.iter().position(|g| (g - z).norm() <= tol)
    }
}

pub fn regularized_group_grid(
    a: &DenseOperator,
    c: &DenseOperator,
    z_grid: &[Complex64],
) -> Result<RegularizedGroupGrid> {
    if a.dim() != c.dim() {
        return Err(LabError::Dimension {
            expected: a.dim(),
            found: c.dim(),
        });
    }
    if !z_grid.contains(&Complex64::new(0.0, 0.0)) {
        return Err(LabError::InvalidParameter(
            "regularized group grid must contain z = 0".into(),
        ));
    }
    let members = z_grid
        .iter()
        .map(|&z| {
            if z == Complex64::new(0.0, 0.0) {
                Ok(c.clone())
            } else {
                Ok(&matrix_exponential(a, z)? * c)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegularizedGroupGrid {
        commutation_defect: (&(a * c) - &(c * a)).norm_fro(),
        generator: a.clone(),
        regularizer: c.clone(),
        z_grid: z_grid.to_vec(),
        members,
    })
}

/// {0} together with `n_args` equally spaced arguments on each of
/// `n_moduli` log-spaced radii between `r_min` and `r_max`.
pub fn annular_z_grid(r_min: f64, r_max: f64, n_moduli: usize, n_args: usize) -> Result<Vec<Complex64>> {
    if !(r_min > 0.0 && r_max >= r_min && r_max.is_finite()) || n_moduli == 0 || n_args == 0 {
        return Err(LabError::InvalidParameter(format!(
            "annular grid needs 0 < r_min ≤ r_max and positive counts, got {r_min}, {r_max}, {n_moduli}, {n_args}"
        )));
    }
    let mut grid = vec![Complex64::new(0.0, 0.0)];
    for i in 0..n_moduli {
        let frac = if n_moduli == 1 { 0.0 } else { i as f64 / (n_moduli - 1) as f64 };
        let r = r_min * (r_max / r_min).powf(frac);
        for j in 0..n_args {
            let theta = std::f64::consts::TAU * j as f64 / n_args as f64;
            grid.push(Complex64::from_polar(r, theta));
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupAxiomsReport {
    pub verdict: Verdict,
    pub max_residual: f64,
    pub threshold: f64,
    /// Grid pairs (z, w) with z + w also on the grid.
    pub pairs_checked: usize,
    /// Pairs with z or w nonzero.
    pub nontrivial_pairs: usize,
    pub insufficient_grid: bool,
    pub worst_pair: Option<(Complex64, Complex64)>,
    pub commutation_defect: f64,
}

/// Checks S(z+w)·C = S(z)·S(w) over every grid pair whose sum is on the grid.
pub fn group_axioms_check(g: &RegularizedGroupGrid, cfg: &ToleranceConfig) -> GroupAxiomsReport {
    let c = &g.regularizer;
    let threshold = cfg.tol_residual * c.norm_fro().powi(2);
    let mut max_residual: f64 = 0.0;
    let mut worst_pair = None;
    let mut pairs_checked = 0;
    let mut nontrivial_pairs = 0;
    let zero = Complex64::new(0.0, 0.0);
    for (i, &z) in g.z_grid.iter().enumerate() {
        for (j, &w) in g.z_grid.iter().enumerate() {
            let Some(k) = g.index_of(z + w) else { continue };
            pairs_checked += 1;
            if z != zero || w != zero {
                nontrivial_pairs += 1;
            }
            let lhs = &g.members[k] * c;
            let rhs = &g.members[i] * &g.members[j];
            let residual = (&lhs - &rhs).norm_fro();
            if residual > max_residual || worst_pair.is_none() {
                max_residual = max_residual.max(residual);
                worst_pair = Some((z, w));
            }
        }
    }
    GroupAxiomsReport {
        verdict: Verdict::from_bool(max_residual <= threshold),
        max_residual,
        threshold,
        pairs_checked,
        nontrivial_pairs,
        insufficient_grid: nontrivial_pairs == 0,
        worst_pair,
        commutation_defect: g.commutation_defect,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonvanishingReport {
    pub verdict: Verdict,
    pub min_norm: f64,
    pub argmin: Complex64,
}

/// min over the grid of ‖S(z)x‖, passing when it stays above the zero
/// cutoff.
pub fn nonvanishing_orbit_check(
    g: &RegularizedGroupGrid,
    x: &CVector,
    cfg: &ToleranceConfig,
) -> Result<NonvanishingReport> {
    let nx = x.norm();
    if nx <= cfg.zero_cutoff {
        return Err(LabError::ZeroVector { norm: nx });
    }
    let mut min_norm = f64::INFINITY;
    let mut argmin = Complex64::new(0.0, 0.0);
    for (z, m) in g.z_grid.iter().zip(&g.members) {
        let n = m.apply(x)?.norm();
        if n < min_norm {
            min_norm = n;
            argmin = *z;
        }
    }
    Ok(NonvanishingReport {
        verdict: Verdict::from_bool(min_norm > cfg.zero_cutoff),
        min_norm,
        argmin,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailReport {
    pub omega0: f64,
    pub tail_members: usize,
    pub tail: DensityReport,
    pub full: DensityReport,
}

/// ε-supercyclicity restricted to the members with |z| > ω₀, reported next
/// to the unrestricted verdict.
pub fn tail_density_check(
    g: &RegularizedGroupGrid,
    x: &CVector,
    omega0: f64,
    probes: &ProbeSet,
    cfg: &ToleranceConfig,
) -> Result<TailReport> {
    if !(omega0 >= 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "omega0 must be non-negative, got {omega0}"
        )));
    }
    let tail: Vec<DenseOperator> = g
        .z_grid
        .iter()
        .zip(&g.members)
        .filter(|(z, _)| z.norm() > omega0)
        .map(|(_, m)| m.clone())
        .collect();
    if tail.is_empty() {
        return Err(LabError::EmptyTail { omega0 });
    }
    let tail_members = tail.len();
    let tail_family = OperatorFamily::finite(tail)?;
    Ok(TailReport {
        omega0,
        tail_members,
        tail: eps_supercyclic_test(&tail_family, x, probes, cfg)?,
        full: eps_supercyclic_test(&g.family(), x, probes, cfg)?,
    })
}
