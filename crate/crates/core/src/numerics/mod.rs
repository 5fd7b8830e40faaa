//! Complex dense linear algebra: vectors, operators, the matrix
//! exponential and the projective (sine) distance behind every density
//! question.

mod expm;
mod operator;
mod projective;
mod tolerance;
mod vector;

pub use expm::matrix_exponential;
pub use operator::DenseOperator;
pub use projective::{least_squares_scalar, projective_distance};
pub(crate) use projective::unit_distance;
pub use tolerance::ToleranceConfig;
pub use vector::CVector;

pub use num_complex::Complex64;

/// Matrix-vector product, with a dimension check.
pub fn apply_operator(t: &DenseOperator, x: &CVector) -> crate::Result<CVector> {
    t.apply(x)
}
