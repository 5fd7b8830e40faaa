use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::vector::CVector;
use crate::error::{LabError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A d×d complex matrix acting on ℂ^d, stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Complex64>>", into = "Vec<Vec<Complex64>>")]
pub struct DenseOperator {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseOperator {
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        if dim < 2 {
            return Err(LabError::Dimension { expected: 2, found: dim });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(LabError::Dimension {
                expected: dim,
                found: bad.len(),
            });
        }
        Ok(Self {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds an operator from real row-major entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)).collect())
                .collect(),
        )
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(dim >= 2, "ambient dimension must be at least 2");
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| ZERO)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { ZERO })
    }

    /// Permutation matrix sending e_j to e_{perm[j]}.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let dim = perm.len();
        let mut seen = vec![false; dim];
        for &p in perm {
            if p >= dim || seen[p] {
                return Err(LabError::InvalidParameter(format!(
                    "{perm:?} is not a permutation"
                )));
            }
            seen[p] = true;
        }
        Ok(Self::from_fn(dim, |i, j| if perm[j] == i { ONE } else { ZERO }))
    }

    /// Rank-one operator u·v*.
    pub fn outer(u: &CVector, v: &CVector) -> Self {
        assert_eq!(u.dim(), v.dim(), "outer: dimension mismatch");
        let (u, v) = (u.entries(), v.entries());
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn random_gaussian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Self::from_fn(dim, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })
    }

    /// Block-diagonal operator T₁ ⊕ … ⊕ T_n.
    pub fn block_diagonal(blocks: &[&DenseOperator]) -> Self {
        let dim = blocks.iter().map(|b| b.dim).sum();
        let mut out = Self::zeros(dim);
        let mut offset = 0;
        for b in blocks {
            for i in 0..b.dim {
                for j in 0..b.dim {
                    out.data[(offset + i) * dim + offset + j] = b.get(i, j);
                }
            }
            offset += b.dim;
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.dim + j] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    /// Matrix-vector product T·x.
    pub fn apply(&self, x: &CVector) -> Result<CVector> {
        if x.dim() != self.dim {
            return Err(LabError::Dimension {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &CVector) -> CVector {
        let xs = x.entries();
        let out = self
            .data
            .chunks(self.dim)
            .map(|row| row.iter().zip(xs).map(|(a, b)| a * b).sum())
            .collect();
        CVector::from_entries_unchecked(out)
    }

    /// Composition self·other (apply `other` first).
    pub fn compose(&self, other: &DenseOperator) -> Result<DenseOperator> {
        if other.dim != self.dim {
            return Err(LabError::Dimension {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(self.matmul(other))
    }

    fn matmul(&self, other: &DenseOperator) -> DenseOperator {
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                for (out, b) in data[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *out += a * b;
                }
            }
        }
        DenseOperator { dim: n, data }
    }

    pub fn scale(&self, alpha: Complex64) -> DenseOperator {
        DenseOperator {
            dim: self.dim,
            data: self.data.iter().map(|z| z * alpha).collect(),
        }
    }

    pub fn adjoint(&self) -> DenseOperator {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn powi(&self, exponent: u32) -> DenseOperator {
        let mut result = Self::identity(self.dim);
        let mut base = self.clone();
        let mut e = exponent;
        while e > 0 {
            if e & 1 == 1 {
                result = result.matmul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base);
            }
        }
        result
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Spectral norm (largest singular value).
    pub fn norm_spectral(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.get(i, j) == ZERO))
    }

    pub fn diagonal_entries(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    fn from_nalgebra(m: &DMatrix<Complex64>) -> DenseOperator {
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    /// Singular values in non-increasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self
            .to_nalgebra()
            .singular_values()
            .iter()
            .copied()
            .collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// 2-norm condition number σ_max/σ_min; infinite for singular operators.
    pub fn condition_number(&self) -> f64 {
        let s = self.singular_values();
        let (max, min) = (s[0], s[s.len() - 1]);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Numerical rank: singular values above `rel_tol·σ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let s = self.singular_values();
        let cutoff = rel_tol * s[0];
        if s[0] == 0.0 {
            return 0;
        }
        s.iter().filter(|&&v| v > cutoff).count()
    }

    /// Inverse via LU; fails when σ_min/σ_max is below `rel_tol`.
    pub fn inverse(&self, rel_tol: f64) -> Result<DenseOperator> {
        let s = self.singular_values();
        let sigma_min = s[s.len() - 1];
        if s[0] == 0.0 || sigma_min <= rel_tol * s[0] {
            return Err(LabError::NotInvertible { sigma_min });
        }
        let inv = self
            .to_nalgebra()
            .lu()
            .try_inverse()
            .ok_or(LabError::NotInvertible { sigma_min })?;
        Ok(Self::from_nalgebra(&inv))
    }

    /// Solves self·X = rhs for X.
    pub(crate) fn solve(&self, rhs: &DenseOperator) -> Result<DenseOperator> {
        let lu = self.to_nalgebra().lu();
        let x = lu
            .solve(&rhs.to_nalgebra())
            .ok_or_else(|| LabError::Numerical("singular linear system".into()))?;
        Ok(Self::from_nalgebra(&x))
    }
}

impl TryFrom<Vec<Vec<Complex64>>> for DenseOperator {
    type Error = LabError;

    fn try_from(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<DenseOperator> for Vec<Vec<Complex64>> {
    fn from(op: DenseOperator) -> Self {
        op.rows()
    }
}

impl fmt::Debug for DenseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.dim)).finish()
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;

    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "operator product: dimension mismatch");
        self.matmul(rhs)
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;

    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "operator sum: dimension mismatch");
        DenseOperator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;

    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "operator difference: dimension mismatch");
        DenseOperator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}
