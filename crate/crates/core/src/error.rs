//! Error type shared by every module of the laboratory.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("probe vector has norm {norm:e}, at or below the zero cutoff")]
    ZeroProbe { norm: f64 },

    #[error("vector has norm {norm:e}, at or below the zero cutoff")]
    ZeroVector { norm: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("scalar at position {index} is zero")]
    InvalidScalar { index: usize },

    #[error("index {index} out of range for {len} members")]
    Index { index: usize, len: usize },

    #[error("operator is not invertible (smallest singular value {sigma_min:e})")]
    NotInvertible { sigma_min: f64 },

    #[error("pairing has no entry for member {0}")]
    Pairing(usize),

    #[error("ball {index} is invalid: {reason}")]
    InvalidBall { index: usize, reason: String },

    #[error("declared limit {index} is not a pointwise limit of its approximants (gap {gap:e})")]
    NotALimit { index: usize, gap: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no grid point lies beyond omega0 = {omega0}")]
    EmptyTail { omega0: f64 },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("configuration error: {0}")]
    Config(String),
}

impl LabError {
    /// Process exit code used by the CLI: 2 for configuration problems,
    /// 3 for everything raised by the numerics.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
