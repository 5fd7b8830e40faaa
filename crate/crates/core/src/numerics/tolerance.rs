use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Every numeric threshold used by the checkers, in one record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Projective-distance threshold for density verdicts.
    pub eps_density: f64,
    /// Residual allowed for identities that hold exactly in exact arithmetic.
    pub tol_residual: f64,
    /// Norm at or below which a vector counts as zero.
    pub zero_cutoff: f64,
    /// Maximum number of family members enumerated.
    pub budget: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eps_density: 0.15,
            tol_residual: 1e-10,
            zero_cutoff: 1e-14,
            budget: 100_000,
        }
    }
}

impl ToleranceConfig {
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps_density = eps;
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(LabError::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive("eps_density", self.eps_density)?;
        positive("tol_residual", self.tol_residual)?;
        positive("zero_cutoff", self.zero_cutoff)?;
        if self.budget == 0 {
            return Err(LabError::InvalidParameter("budget must be at least 1".into()));
        }
        Ok(())
    }
}
