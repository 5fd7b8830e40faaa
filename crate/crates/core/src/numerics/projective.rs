use num_complex::Complex64;

use super::tolerance::ToleranceConfig;
use super::vector::CVector;
use crate::error::{LabError, Result};

/// Sine distance from the direction of `u` to the complex line ℂ·v:
/// min over γ ∈ ℂ of ‖u/‖u‖ − γv‖ = sqrt(1 − |⟨u,v⟩|²/(‖u‖²‖v‖²)).
///
/// A zero `v` spans nothing and sits at distance 1 from every probe. A
/// zero `u` is rejected.
pub fn projective_distance(u: &CVector, v: &CVector, cfg: &ToleranceConfig) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(LabError::Dimension {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    let nu = u.norm();
    if nu <= cfg.zero_cutoff {
        return Err(LabError::ZeroProbe { norm: nu });
    }
    let unit = u.scale(Complex64::new(1.0 / nu, 0.0));
    Ok(unit_distance(unit.entries(), v.entries(), cfg.zero_cutoff))
}

/// Distance from a unit vector `unit` to ℂ·v, computed from the
/// least-squares residual so nearly parallel pairs keep full precision.
pub(crate) fn unit_distance(unit: &[Complex64], v: &[Complex64], zero_cutoff: f64) -> f64 {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 1.0;
    }
    let inv = 1.0 / scale;
    let scaled_sqr: f64 = v.iter().map(|z| (z * inv).norm_sqr()).sum();
    let nv = scale * scaled_sqr.sqrt();
    if nv <= zero_cutoff || !nv.is_finite() {
        return 1.0;
    }
    let inv_nv = 1.0 / nv;
    let g: Complex64 = v
        .iter()
        .zip(unit)
        .map(|(b, a)| (b * inv_nv).conj() * a)
        .sum();
    let r2: f64 = v
        .iter()
        .zip(unit)
        .map(|(b, a)| (a - g * b * inv_nv).norm_sqr())
        .sum();
    r2.sqrt().clamp(0.0, 1.0)
}

/// The scalar γ minimising ‖target − γ·v‖, i.e. ⟨v,target⟩/‖v‖².
pub fn least_squares_scalar(target: &CVector, v: &CVector) -> Complex64 {
    let nv2 = v.norm_sqr();
    if nv2 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    v.dot(target) / nv2
}
