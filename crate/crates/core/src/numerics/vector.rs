use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// A vector of the ambient space ℂ^d, d ≥ 2.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct CVector {
    entries: Vec<Complex64>,
}

impl CVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(LabError::Dimension {
                expected: 2,
                found: entries.len(),
            });
        }
        Ok(Self { entries })
    }

    /// Builds a vector from real coordinates.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 2, "ambient dimension must be at least 2");
        Self {
            entries: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    /// Canonical basis vector e_{index+1}.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[index] = Complex64::new(1.0, 0.0);
        v
    }

    /// Vector with independent standard complex Gaussian entries.
    pub fn random_gaussian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        assert!(dim >= 2, "ambient dimension must be at least 2");
        let entries = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self { entries }
    }

    /// Uniformly distributed point of the unit sphere of ℂ^d.
    pub fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        loop {
            let v = Self::random_gaussian(dim, rng);
            let n = v.norm();
            if n > 1e-8 {
                return v.scale(Complex64::new(1.0 / n, 0.0));
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.entries
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Euclidean norm, computed with rescaling so tiny and huge entries do
    /// not under- or overflow.
    pub fn norm(&self) -> f64 {
        let scale = self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 || !scale.is_finite() {
            return scale;
        }
        let s: f64 = self.entries.iter().map(|z| (z / scale).norm_sqr()).sum();
        scale * s.sqrt()
    }

    /// Hermitian inner product, conjugate-linear in `self`:
    /// Σ conj(selfᵢ)·otherᵢ.
    pub fn dot(&self, other: &CVector) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "dot: dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, alpha: Complex64) -> CVector {
        CVector {
            entries: self.entries.iter().map(|z| z * alpha).collect(),
        }
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: Complex64, other: &CVector) -> CVector {
        assert_eq!(self.dim(), other.dim(), "add_scaled: dimension mismatch");
        CVector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }

    /// Unit vector in the direction of `self`; fails below `zero_cutoff`.
    pub fn normalized(&self, zero_cutoff: f64) -> Result<CVector> {
        let n = self.norm();
        if n <= zero_cutoff {
            return Err(LabError::ZeroVector { norm: n });
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    /// Concatenation (x₁, …, x_n) of component vectors.
    pub fn concat(parts: &[CVector]) -> CVector {
        CVector {
            entries: parts.iter().flat_map(|p| p.entries.iter().copied()).collect(),
        }
    }

    /// Slice of coordinates `[start, start + len)` as a vector of ℂ^len.
    pub fn segment(&self, start: usize, len: usize) -> Result<CVector> {
        if start + len > self.dim() {
            return Err(LabError::Dimension {
                expected: start + len,
                found: self.dim(),
            });
        }
        CVector::new(self.entries[start..start + len].to_vec())
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn from_entries_unchecked(entries: Vec<Complex64>) -> Self {
        debug_assert!(entries.len() >= 2);
        Self { entries }
    }
}

impl TryFrom<Vec<Complex64>> for CVector {
    type Error = LabError;

    fn try_from(entries: Vec<Complex64>) -> Result<Self> {
        Self::new(entries)
    }
}

impl From<CVector> for Vec<Complex64> {
    fn from(v: CVector) -> Self {
        v.entries
    }
}

impl fmt::Debug for CVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.iter()).finish()
    }
}

impl Add for &CVector {
    type Output = CVector;

    fn add(self, rhs: &CVector) -> CVector {
        self.add_scaled(Complex64::new(1.0, 0.0), rhs)
    }
}

impl Sub for &CVector {
    type Output = CVector;

    fn sub(self, rhs: &CVector) -> CVector {
        self.add_scaled(Complex64::new(-1.0, 0.0), rhs)
    }
}

impl Neg for &CVector {
    type Output = CVector;

    fn neg(self) -> CVector {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}
