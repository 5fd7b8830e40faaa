//! The supercyclicity criterion for sets of operators, checked on finite
//! index sequences, and a truncated weighted backward shift that satisfies
//! it exactly.
//!
//! For each index k three quantities are profiled:
//!
//! 1. max over x ∈ X₀ of ‖α_k·T_k·x‖,
//! 2. max over y ∈ Y₀ of ‖α_k⁻¹·S_k·y‖,
//! 3. max over y ∈ Y₀ of ‖T_k·S_k·y − y‖.
//!
//! A finite profile cannot certify a limit. A condition counts as
//! converging when its tail ends at its floor and either the final value is
//! within `tol_residual` or the last three values strictly decrease to
//! within `eps_density`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::families::OperatorFamily;
use crate::numerics::{CVector, DenseOperator, ToleranceConfig};
use crate::report::Verdict;

/// Sequences (α_k), (T_k), (S_k) and the probe sets X₀, Y₀. X₀ and Y₀ stand
/// in for dense subsets and are always declared explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCriterionData")]
pub struct CriterionData {
    index_seq: Vec<usize>,
    alphas: Vec<Complex64>,
    member_seq: Vec<usize>,
    s_seq: Vec<DenseOperator>,
    x0: Vec<CVector>,
    y0: Vec<CVector>,
}

#[derive(Deserialize)]
struct RawCriterionData {
    index_seq: Vec<usize>,
    alphas: Vec<Complex64>,
    member_seq: Vec<usize>,
    s_seq: Vec<DenseOperator>,
    x0: Vec<CVector>,
    y0: Vec<CVector>,
}

impl TryFrom<RawCriterionData> for CriterionData {
    type Error = LabError;

    fn try_from(r: RawCriterionData) -> Result<Self> {
        CriterionData::new(r.index_seq, r.alphas, r.member_seq, r.s_seq, r.x0, r.y0)
    }
}

impl CriterionData {
    pub fn new(
        index_seq: Vec<usize>,
        alphas: Vec<Complex64>,
        member_seq: Vec<usize>,
        s_seq: Vec<DenseOperator>,
        x0: Vec<CVector>,
        y0: Vec<CVector>,
    ) -> Result<Self> {
        let n = index_seq.len();
        if n == 0 {
            return Err(LabError::InvalidParameter("empty index sequence".into()));
        }
        for len in [alphas.len(), member_seq.len(), s_seq.len()] {
            if len != n {
                return Err(LabError::LengthMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        if index_seq[0] == 0 || index_seq.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::InvalidParameter(
                "index sequence must be strictly increasing positive integers".into(),
            ));
        }
        if let Some(index) = alphas.iter().position(|a| *a == Complex64::new(0.0, 0.0)) {
            return Err(LabError::InvalidScalar { index });
        }
        if x0.is_empty() || y0.is_empty() {
            return Err(LabError::InvalidParameter("X0 and Y0 must be nonempty".into()));
        }
        Ok(Self {
            index_seq,
            alphas,
            member_seq,
            s_seq,
            x0,
            y0,
        })
    }

    pub fn index_seq(&self) -> &[usize] {
        &self.index_seq
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }

    pub fn member_seq(&self) -> &[usize] {
        &self.member_seq
    }

    pub fn s_seq(&self) -> &[DenseOperator] {
        &self.s_seq
    }

    pub fn x0(&self) -> &[CVector] {
        &self.x0
    }

    pub fn y0(&self) -> &[CVector] {
        &self.y0
    }

    /// The same data with every α_k multiplied by `c`.
    pub fn rescale_alphas(&self, c: Complex64) -> Result<Self> {
        Self::new(
            self.index_seq.clone(),
            self.alphas.iter().map(|a| a * c).collect(),
            self.member_seq.clone(),
            self.s_seq.clone(),
            self.x0.clone(),
            self.y0.clone(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub indices: Vec<usize>,
    /// max ‖α_k T_k x‖ over X₀.
    pub scaled_orbit: Vec<f64>,
    /// max ‖α_k⁻¹ S_k y‖ over Y₀.
    pub scaled_right_inverse: Vec<f64>,
    /// max ‖T_k S_k y − y‖ over Y₀.
    pub reconstruction: Vec<f64>,
    pub tol: f64,
    pub decay_threshold: f64,
    /// Final value within `tol`, per condition.
    pub final_within_tol: [bool; 3],
    /// Last three values strictly decreasing to within `decay_threshold`.
    pub decaying: [bool; 3],
    /// Tail ends at its floor, per condition.
    pub tail_settled: [bool; 3],
    pub converged: [bool; 3],
}

impl DecayProfile {
    fn conditions(&self) -> [&[f64]; 3] {
        [
            &self.scaled_orbit,
            &self.scaled_right_inverse,
            &self.reconstruction,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub profile: DecayProfile,
    pub verdict: Verdict,
}

// The last value may not exceed either of the two before it.
fn tail_settles(values: &[f64]) -> bool {
    let n = values.len();
    let last = values[n - 1];
    values[n.saturating_sub(3)..n - 1].iter().all(|&v| last <= v)
}

fn strictly_decaying(values: &[f64], threshold: f64) -> bool {
    let n = values.len();
    n >= 3 && values[n - 3] > values[n - 2] && values[n - 2] > values[n - 1] && values[n - 1] <= threshold
}

pub fn verify_criterion(
    g: &OperatorFamily,
    data: &CriterionData,
    cfg: &ToleranceConfig,
) -> Result<CriterionReport> {
    let dim = g.dim();
    for v in data.x0.iter().chain(&data.y0) {
        if v.dim() != dim {
            return Err(LabError::Dimension {
                expected: dim,
                found: v.dim(),
            });
        }
    }
    if let Some(s) = data.s_seq.iter().find(|s| s.dim() != dim) {
        return Err(LabError::Dimension {
            expected: dim,
            found: s.dim(),
        });
    }
    let max_norm = |vs: &[CVector], f: &dyn Fn(&CVector) -> CVector| {
        vs.iter().map(|v| f(v).norm()).fold(0.0, f64::max)
    };
    let n = data.index_seq.len();
    let mut scaled_orbit = Vec::with_capacity(n);
    let mut scaled_right_inverse = Vec::with_capacity(n);
    let mut reconstruction = Vec::with_capacity(n);
    for pos in 0..n {
        let t = g.member(data.member_seq[pos])?;
        let s = &data.s_seq[pos];
        let alpha = data.alphas[pos];
        scaled_orbit.push(max_norm(&data.x0, &|x| t.apply_unchecked(x).scale(alpha)));
        scaled_right_inverse.push(max_norm(&data.y0, &|y| s.apply_unchecked(y).scale(alpha.inv())));
        reconstruction.push(max_norm(&data.y0, &|y| {
            &t.apply_unchecked(&s.apply_unchecked(y)) - y
        }));
    }
    let mut profile = DecayProfile {
        indices: data.index_seq.clone(),
        scaled_orbit,
        scaled_right_inverse,
        reconstruction,
        tol: cfg.tol_residual,
        decay_threshold: cfg.eps_density,
        final_within_tol: [false; 3],
        decaying: [false; 3],
        tail_settled: [false; 3],
        converged: [false; 3],
    };
    let conditions = profile.conditions();
    let final_within_tol = conditions.map(|c| c[c.len() - 1] <= cfg.tol_residual);
    let decaying = conditions.map(|c| strictly_decaying(c, cfg.eps_density));
    let tail_settled = conditions.map(tail_settles);
    let converged = [0, 1, 2].map(|i| tail_settled[i] && (final_within_tol[i] || decaying[i]));
    profile.final_within_tol = final_within_tol;
    profile.decaying = decaying;
    profile.tail_settled = tail_settled;
    profile.converged = converged;
    let pass = converged.iter().all(|&b| b);
    Ok(CriterionReport {
        profile,
        verdict: Verdict::from_bool(pass),
    })
}

/// Truncated backward shift (Bx)_j = x_{j+1} on ℂ^d.
pub fn backward_shift(dim: usize) -> DenseOperator {
    DenseOperator::from_fn(dim, |i, j| {
        if j == i + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Truncated forward shift (Fx)_{j+1} = x_j on ℂ^d.
pub fn forward_shift(dim: usize) -> DenseOperator {
    backward_shift(dim).adjoint()
}

/// T = λB with family {T⁰, …, T^d}, S_k = (F/λ)^k, α_k = 1, k = 1..=⌈d/2⌉,
/// and X₀ = Y₀ = {e₁, …, e_⌈d/2⌉}. Supports stay in the first half of the
/// coordinates, so every shift identity used is exact.
pub fn rolewicz_truncated_family(
    dim: usize,
    lambda: Complex64,
) -> Result<(OperatorFamily, CriterionData)> {
    if dim < 4 {
        return Err(LabError::InvalidParameter(format!(
            "truncated shift needs d ≥ 4, got {dim}"
        )));
    }
    if !(lambda.norm() > 1.0) || !lambda.norm().is_finite() {
        return Err(LabError::InvalidParameter(format!(
            "weight must satisfy |λ| > 1, got {lambda}"
        )));
    }
    let t = backward_shift(dim).scale(lambda);
    let family = OperatorFamily::powers_of(t, dim);
    let half = dim.div_ceil(2);
    let step = forward_shift(dim).scale(lambda.inv());
    let index_seq: Vec<usize> = (1..=half).collect();
    let s_seq = index_seq.iter().map(|&k| step.powi(k as u32)).collect();
    let basis: Vec<CVector> = (0..half).map(|i| CVector::basis(dim, i)).collect();
    let data = CriterionData::new(
        index_seq.clone(),
        vec![Complex64::new(1.0, 0.0); half],
        index_seq,
        s_seq,
        basis.clone(),
        basis,
    )?;
    Ok((family, data))
}

/// Witnesses z = x₀ + α_k⁻¹·S_k·(c_k·y), one per index, with c_k ≤ 1 chosen so
/// that ‖z − x₀‖ ≤ radius/2. Since c_k·y stays in span(Y₀), T_k·z ≈ c_k·y and
/// the scalar 1/c_k recovers y.
pub fn constructive_witnesses(
    data: &CriterionData,
    x0: &CVector,
    y: &CVector,
    radius: f64,
) -> Vec<CVector> {
    data.s_seq
        .iter()
        .zip(&data.alphas)
        .map(|(s, alpha)| {
            let step = s.apply_unchecked(y).scale(alpha.inv());
            let n = step.norm();
            let c = if n > radius / 2.0 { radius / (2.0 * n) } else { 1.0 };
            x0.add_scaled(Complex64::new(c, 0.0), &step)
        })
        .collect()
}
