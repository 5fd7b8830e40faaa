//! Operator families Γ and the transformations applied to them: scaling,
//! direct sums, member removal, similarity conjugation, and verification
//! of user-supplied intertwining maps.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numerics::{CVector, DenseOperator, ToleranceConfig};
use crate::report::Verdict;
use crate::semigroups::{RegularizedGroupGrid, SemigroupGrid};

/// How a family was built. Members are produced on demand from this.
#[derive(Debug, Clone)]
pub enum FamilyKind {
    FiniteList(Vec<DenseOperator>),
    /// T⁰ = I, T¹, …, T^max_exponent.
    PowersOf {
        base: DenseOperator,
        max_exponent: usize,
    },
    /// Member k is scalars[k] times member k of the base family.
    Scaled {
        base: Box<OperatorFamily>,
        scalars: Vec<Complex64>,
    },
    /// Block-diagonal products over the Cartesian product of member
    /// indices, enumerated by increasing index sum.
    DirectSum(Vec<OperatorFamily>),
    /// Member k is φ·T_k·φ⁻¹.
    Conjugated {
        base: Box<OperatorFamily>,
        phi: DenseOperator,
        phi_inv: DenseOperator,
    },
    SemigroupGrid(Arc<SemigroupGrid>),
    RegularizedGroupGrid(Arc<RegularizedGroupGrid>),
    /// The base enumeration with one member left out.
    Pruned {
        base: Box<OperatorFamily>,
        removed: usize,
    },
}

/// A finite set Γ of operators on ℂ^d with a deterministic enumeration.
#[derive(Debug, Clone)]
pub struct OperatorFamily {
    kind: FamilyKind,
    dim: usize,
    len: usize,
}

impl OperatorFamily {
    pub fn finite(members: Vec<DenseOperator>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| LabError::InvalidParameter("a family needs at least one member".into()))?;
        let dim = first.dim();
        if let Some(bad) = members.iter().find(|m| m.dim() != dim) {
            return Err(LabError::Dimension {
                expected: dim,
                found: bad.dim(),
            });
        }
        let len = members.len();
        Ok(Self {
            kind: FamilyKind::FiniteList(members),
            dim,
            len,
        })
    }

    pub fn powers_of(base: DenseOperator, max_exponent: usize) -> Self {
        Self {
            dim: base.dim(),
            len: max_exponent + 1,
            kind: FamilyKind::PowersOf { base, max_exponent },
        }
    }

    /// The single-member family {I}.
    pub fn identity(dim: usize) -> Self {
        Self::finite(vec![DenseOperator::identity(dim)]).expect("identity family")
    }

    /// {diag(1, w)} for w on the square grid with |Re w|, |Im w| ≤
    /// `half_width` and spacing `step`, ordered by real part then
    /// imaginary part.
    pub fn diagonal_grid(half_width: f64, step: f64) -> Result<Self> {
        if !(half_width > 0.0 && step > 0.0 && half_width.is_finite() && step.is_finite()) {
            return Err(LabError::InvalidParameter(format!(
                "diagonal grid needs positive half width and step, got {half_width}, {step}"
            )));
        }
        let points = (2.0 * half_width / step).round() as usize + 1;
        let coord = |i: usize| -half_width + i as f64 * step;
        let mut members = Vec::with_capacity(points * points);
        for i in 0..points {
            for j in 0..points {
                let w = Complex64::new(coord(i), coord(j));
                members.push(DenseOperator::diagonal(&[Complex64::new(1.0, 0.0), w]));
            }
        }
        Self::finite(members)
    }

    pub(crate) fn from_semigroup(grid: Arc<SemigroupGrid>) -> Self {
        Self {
            dim: grid.generator().dim(),
            len: grid.members().len(),
            kind: FamilyKind::SemigroupGrid(grid),
        }
    }

    pub(crate) fn from_regularized_group(grid: Arc<RegularizedGroupGrid>) -> Self {
        Self {
            dim: grid.generator().dim(),
            len: grid.members().len(),
            kind: FamilyKind::RegularizedGroupGrid(grid),
        }
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    /// Ambient dimension d of ℂ^d.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total number of members |Γ|.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Member `index` of the enumeration.
    pub fn member(&self, index: usize) -> Result<DenseOperator> {
        if index >= self.len {
            return Err(LabError::Index {
                index,
                len: self.len,
            });
        }
        Ok(match &self.kind {
            FamilyKind::FiniteList(m) => m[index].clone(),
            FamilyKind::PowersOf { base, .. } => base.powi(index as u32),
            FamilyKind::Scaled { base, scalars } => base.member(index)?.scale(scalars[index]),
            FamilyKind::DirectSum(parts) => {
                let lens: Vec<usize> = parts.iter().map(|p| p.len).collect();
                let tuple = diagonal_tuples(&lens, index + 1)
                    .pop()
                    .expect("index below product size");
                let blocks = parts
                    .iter()
                    .zip(&tuple)
                    .map(|(p, &k)| p.member(k))
                    .collect::<Result<Vec<_>>>()?;
                DenseOperator::block_diagonal(&blocks.iter().collect::<Vec<_>>())
            }
            FamilyKind::Conjugated { base, phi, phi_inv } => {
                &(phi * &base.member(index)?) * phi_inv
            }
            FamilyKind::SemigroupGrid(g) => g.members()[index].clone(),
            FamilyKind::RegularizedGroupGrid(g) => g.members()[index].clone(),
            FamilyKind::Pruned { base, removed } => {
                base.member(if index < *removed { index } else { index + 1 })?
            }
        })
    }

    /// The first min(budget, |Γ|) members, in enumeration order.
    pub fn enumerate(&self, budget: usize) -> Vec<DenseOperator> {
        let count = budget.min(self.len);
        match &self.kind {
            FamilyKind::FiniteList(m) => m[..count].to_vec(),
            FamilyKind::PowersOf { base, .. } => {
                let mut out = Vec::with_capacity(count);
                let mut current = DenseOperator::identity(self.dim);
                for k in 0..count {
                    if k > 0 {
                        current = &current * base;
                    }
                    out.push(current.clone());
                }
                out
            }
            FamilyKind::Scaled { base, scalars } => base
                .enumerate(count)
                .into_iter()
                .zip(scalars)
                .map(|(m, &a)| m.scale(a))
                .collect(),
            FamilyKind::DirectSum(parts) => {
                let lens: Vec<usize> = parts.iter().map(|p| p.len).collect();
                let tuples = diagonal_tuples(&lens, count);
                let max_index: Vec<usize> = (0..parts.len())
                    .map(|i| tuples.iter().map(|t| t[i]).max().unwrap_or(0))
                    .collect();
                let cached: Vec<Vec<DenseOperator>> = parts
                    .iter()
                    .zip(&max_index)
                    .map(|(p, &m)| p.enumerate(m + 1))
                    .collect();
                tuples
                    .iter()
                    .map(|t| {
                        let blocks: Vec<&DenseOperator> =
                            t.iter().zip(&cached).map(|(&k, c)| &c[k]).collect();
                        DenseOperator::block_diagonal(&blocks)
                    })
                    .collect()
            }
            FamilyKind::Conjugated { base, phi, phi_inv } => base
                .enumerate(count)
                .iter()
                .map(|m| &(phi * m) * phi_inv)
                .collect(),
            FamilyKind::SemigroupGrid(g) => g.members()[..count].to_vec(),
            FamilyKind::RegularizedGroupGrid(g) => g.members()[..count].to_vec(),
            FamilyKind::Pruned { base, removed } => {
                let mut all = base.enumerate((count + 1).min(base.len));
                if *removed < all.len() {
                    all.remove(*removed);
                }
                all.truncate(count);
                all
            }
        }
    }

    /// Images T·x of `x` under the first min(budget, |Γ|) members.
    pub fn orbit(&self, x: &CVector, budget: usize) -> Result<Vec<CVector>> {
        if x.dim() != self.dim {
            return Err(LabError::Dimension {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(self
            .enumerate(budget)
            .iter()
            .map(|t| t.apply_unchecked(x))
            .collect())
    }

    /// The family {α_k·T_k}. Scalars must be nonzero, one per member.
    pub fn scale_members(&self, alphas: &[Complex64]) -> Result<OperatorFamily> {
        if alphas.len() != self.len {
            return Err(LabError::LengthMismatch {
                expected: self.len,
                found: alphas.len(),
            });
        }
        if let Some(index) = alphas.iter().position(|a| *a == Complex64::new(0.0, 0.0)) {
            return Err(LabError::InvalidScalar { index });
        }
        Ok(Self {
            dim: self.dim,
            len: self.len,
            kind: FamilyKind::Scaled {
                base: Box::new(self.clone()),
                scalars: alphas.to_vec(),
            },
        })
    }

    /// Γ₁ ⊕ … ⊕ Γ_n acting on the product space.
    pub fn direct_sum(families: &[OperatorFamily]) -> Result<OperatorFamily> {
        if families.len() < 2 {
            return Err(LabError::InvalidParameter(
                "a direct sum needs at least two families".into(),
            ));
        }
        let len = families
            .iter()
            .try_fold(1usize, |acc, f| acc.checked_mul(f.len))
            .ok_or_else(|| LabError::InvalidParameter("direct sum too large".into()))?;
        Ok(Self {
            dim: families.iter().map(|f| f.dim).sum(),
            len,
            kind: FamilyKind::DirectSum(families.to_vec()),
        })
    }

    /// The same enumeration without member `index`.
    pub fn remove_member(&self, index: usize) -> Result<OperatorFamily> {
        if index >= self.len {
            return Err(LabError::Index {
                index,
                len: self.len,
            });
        }
        if self.len == 1 {
            return Err(LabError::InvalidParameter(
                "cannot remove the only member of a family".into(),
            ));
        }
        if let FamilyKind::FiniteList(m) = &self.kind {
            let mut rest = m.clone();
            rest.remove(index);
            return Self::finite(rest);
        }
        Ok(Self {
            dim: self.dim,
            len: self.len - 1,
            kind: FamilyKind::Pruned {
                base: Box::new(self.clone()),
                removed: index,
            },
        })
    }

    /// The similar family {φ·T·φ⁻¹ : T ∈ Γ}.
    pub fn conjugate_similar(&self, phi: &IntertwiningMap) -> Result<OperatorFamily> {
        let phi_inv = phi.inverse()?;
        if phi.phi.dim() != self.dim {
            return Err(LabError::Dimension {
                expected: self.dim,
                found: phi.phi.dim(),
            });
        }
        Ok(Self {
            dim: self.dim,
            len: self.len,
            kind: FamilyKind::Conjugated {
                base: Box::new(self.clone()),
                phi: phi.phi.clone(),
                phi_inv: phi_inv.clone(),
            },
        })
    }
}

/// Index tuples of the Cartesian product of ranges `0..lens[i]`, ordered by
/// increasing index sum and lexicographically within a sum; at most
/// `limit` tuples.
pub(crate) fn diagonal_tuples(lens: &[usize], limit: usize) -> Vec<Vec<usize>> {
    fn fill(
        lens: &[usize],
        remaining: usize,
        prefix: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        let pos = prefix.len();
        if pos + 1 == lens.len() {
            if remaining < lens[pos] {
                prefix.push(remaining);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        let tail_cap: usize = lens[pos + 1..].iter().map(|l| l - 1).sum();
        let lo = remaining.saturating_sub(tail_cap);
        let hi = remaining.min(lens[pos] - 1);
        for k in lo..=hi {
            if out.len() >= limit {
                return;
            }
            prefix.push(k);
            fill(lens, remaining - k, prefix, out, limit);
            prefix.pop();
        }
    }

    let mut out = Vec::new();
    if lens.is_empty() || lens.contains(&0) {
        return out;
    }
    let max_sum: usize = lens.iter().map(|l| l - 1).sum();
    let mut prefix = Vec::with_capacity(lens.len());
    for s in 0..=max_sum {
        if out.len() >= limit {
            break;
        }
        fill(lens, s, &mut prefix, &mut out, limit);
    }
    out
}

/// A map φ used for similarity (invertible) or quasi-similarity
/// (dense range only).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntertwiningMap {
    pub phi: DenseOperator,
    pub invertible: bool,
    pub right_inverse: Option<DenseOperator>,
}

impl IntertwiningMap {
    /// Wraps φ, computing its inverse when φ·φ⁻¹ reproduces I to
    /// `tol_residual`.
    pub fn new(phi: DenseOperator, cfg: &ToleranceConfig) -> Self {
        let right_inverse = phi.inverse(cfg.zero_cutoff).ok().filter(|inv| {
            (&(&phi * inv) - &DenseOperator::identity(phi.dim())).norm_fro() <= cfg.tol_residual
        });
        Self {
            invertible: right_inverse.is_some(),
            right_inverse,
            phi,
        }
    }

    /// A map declared only as a quasi-similarity witness.
    pub fn quasi(phi: DenseOperator) -> Self {
        Self {
            phi,
            invertible: false,
            right_inverse: None,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            phi: DenseOperator::identity(dim),
            invertible: true,
            right_inverse: Some(DenseOperator::identity(dim)),
        }
    }

    pub fn inverse(&self) -> Result<&DenseOperator> {
        match (&self.right_inverse, self.invertible) {
            (Some(inv), true) => Ok(inv),
            _ => Err(LabError::NotInvertible {
                sigma_min: self.phi.singular_values().last().copied().unwrap_or(0.0),
            }),
        }
    }

    /// The inverse map φ⁻¹ as an intertwining map in its own right.
    pub fn inverted(&self) -> Result<IntertwiningMap> {
        let inv = self.inverse()?.clone();
        Ok(Self {
            phi: inv,
            invertible: true,
            right_inverse: Some(self.phi.clone()),
        })
    }

    pub fn condition_number(&self) -> f64 {
        self.phi.condition_number()
    }
}

/// Outcome of checking S·φ = φ·T over paired members.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntertwiningReport {
    pub max_residual: f64,
    /// Member of G at which the largest residual occurs.
    pub worst_member: usize,
    pub intertwining: Verdict,
    pub rank: usize,
    pub smallest_singular_value: f64,
    /// Full rank stands in for dense range in finite dimension.
    pub dense_range: Verdict,
    pub pairs_checked: usize,
}

impl IntertwiningReport {
    pub fn quasi_similar(&self) -> bool {
        self.intertwining.is_pass() && self.dense_range.is_pass()
    }
}

/// Checks ‖S·φ − φ·T‖ ≤ tol_residual for each enumerated T ∈ G paired
/// with S = H[pairing[k]].
pub fn verify_intertwining(
    g: &OperatorFamily,
    h: &OperatorFamily,
    phi: &IntertwiningMap,
    pairing: &[usize],
    cfg: &ToleranceConfig,
) -> Result<IntertwiningReport> {
    let members = g.enumerate(cfg.budget);
    if phi.phi.dim() != g.dim() || h.dim() != g.dim() {
        return Err(LabError::Dimension {
            expected: g.dim(),
            found: if h.dim() != g.dim() { h.dim() } else { phi.phi.dim() },
        });
    }
    let mut max_residual: f64 = 0.0;
    let mut worst_member = 0;
    for (k, t) in members.iter().enumerate() {
        let target = *pairing.get(k).ok_or(LabError::Pairing(k))?;
        let s = h.member(target)?;
        let residual = (&(&s * &phi.phi) - &(&phi.phi * t)).norm_fro();
        if residual > max_residual {
            max_residual = residual;
            worst_member = k;
        }
    }
    let singular = phi.phi.singular_values();
    let smallest = *singular.last().expect("nonempty spectrum");
    let rank = phi.phi.rank(cfg.tol_residual);
    Ok(IntertwiningReport {
        max_residual,
        worst_member,
        intertwining: Verdict::from_bool(max_residual <= cfg.tol_residual),
        rank,
        smallest_singular_value: smallest,
        dense_range: Verdict::from_bool(rank == phi.phi.dim()),
        pairs_checked: members.len(),
    })
}
