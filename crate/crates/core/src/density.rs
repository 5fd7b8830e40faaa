//! Density of projective orbits: ε-approximate supercyclic vectors, the
//! Gδ membership formula, supertransitivity scans, supercyclic-vector
//! search and consistency of adjoined pointwise limits.
//!
//! A vector x is tested on projective classes only: ℂ·Orb(Γ,x) is dense in
//! ℂ^d exactly when {[Tx] : Tx ≠ 0} is dense in projective space, so the
//! scalar α never has to be searched. Open sets are stood in for by unit
//! probe directions together with a radius ε.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::families::OperatorFamily;
use crate::numerics::{unit_distance, CVector, DenseOperator, ToleranceConfig};
use crate::report::Verdict;

/// Seed used for random probes when none is given.
pub const DEFAULT_PROBE_SEED: u64 = 0x5eed_c0de;

/// Unit vectors used as density targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    probes: Vec<CVector>,
    seed: Option<u64>,
}

impl ProbeSet {
    /// The canonical basis followed by `count − dim` uniform random points of
    /// the unit sphere drawn from `seed`.
    pub fn generate(dim: usize, count: usize, seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(LabError::Dimension { expected: 2, found: dim });
        }
        if count < 2 * dim {
            return Err(LabError::InvalidParameter(format!(
                "probe count {count} is below 2·dim = {}",
                2 * dim
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut probes: Vec<CVector> = (0..dim).map(|i| CVector::basis(dim, i)).collect();
        probes.extend((dim..count).map(|_| CVector::random_unit(dim, &mut rng)));
        Ok(Self {
            probes,
            seed: Some(seed),
        })
    }

    /// Explicit probes, normalized to unit length.
    pub fn from_vectors(vectors: Vec<CVector>, cfg: &ToleranceConfig) -> Result<Self> {
        let dim = vectors
            .first()
            .map(CVector::dim)
            .ok_or_else(|| LabError::InvalidParameter("empty probe set".into()))?;
        if vectors.len() < 2 * dim {
            return Err(LabError::InvalidParameter(format!(
                "probe count {} is below 2·dim = {}",
                vectors.len(),
                2 * dim
            )));
        }
        let probes = vectors
            .iter()
            .map(|v| {
                if v.dim() != dim {
                    return Err(LabError::Dimension {
                        expected: dim,
                        found: v.dim(),
                    });
                }
                v.normalized(cfg.zero_cutoff)
                    .map_err(|_| LabError::ZeroProbe { norm: v.norm() })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { probes, seed: None })
    }

    pub fn probes(&self) -> &[CVector] {
        &self.probes
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.probes[0].dim()
    }

    pub fn len(&self) -> usize {
        self.probes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: CVector,
    pub radius: f64,
}

/// A finite stand-in for a countable basis (U_n) of the topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallBasis {
    balls: Vec<Ball>,
}

impl BallBasis {
    pub fn new(balls: Vec<Ball>, cfg: &ToleranceConfig) -> Result<Self> {
        for (index, b) in balls.iter().enumerate() {
            if !(b.radius > 0.0 && b.radius.is_finite()) {
                return Err(LabError::InvalidBall {
                    index,
                    reason: format!("radius {} is not positive", b.radius),
                });
            }
            if b.center.norm() <= cfg.zero_cutoff {
                return Err(LabError::InvalidBall {
                    index,
                    reason: "center is zero".into(),
                });
            }
        }
        Ok(Self { balls })
    }

    /// One ball per probe, centered at the probe with radius
    /// `relative_radius·‖probe‖`.
    pub fn matched_to_probes(probes: &ProbeSet, relative_radius: f64) -> Self {
        Self {
            balls: probes
                .probes()
                .iter()
                .map(|p| Ball {
                    center: p.clone(),
                    radius: relative_radius * p.norm(),
                })
                .collect(),
        }
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }
}

/// Nearest orbit point for one probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeHit {
    pub distance: f64,
    pub member: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub per_probe: Vec<ProbeHit>,
    /// Largest per-probe distance.
    pub worst_case: f64,
    pub worst_probe: usize,
    pub verdict: Verdict,
    pub members_used: usize,
    pub budget: usize,
    pub eps: f64,
    pub seed: Option<u64>,
}

// Nearest orbit point to a unit probe; ties resolve to the lowest index.
fn nearest(orbit: &[CVector], unit_probe: &CVector, zero_cutoff: f64) -> ProbeHit {
    let mut best = ProbeHit {
        distance: 1.0,
        member: 0,
    };
    let mut first = true;
    for (k, v) in orbit.iter().enumerate() {
        let d = unit_distance(unit_probe.entries(), v.entries(), zero_cutoff);
        if first || d < best.distance {
            best = ProbeHit { distance: d, member: k };
            first = false;
            if d == 0.0 {
                break;
            }
        }
    }
    best
}

fn unit_probe(p: &CVector, cfg: &ToleranceConfig) -> Result<CVector> {
    let n = p.norm();
    if n <= cfg.zero_cutoff {
        return Err(LabError::ZeroProbe { norm: n });
    }
    Ok(p.scale(Complex64::new(1.0 / n, 0.0)))
}

fn check_nonzero(x: &CVector, cfg: &ToleranceConfig) -> Result<()> {
    let n = x.norm();
    if n <= cfg.zero_cutoff {
        return Err(LabError::ZeroVector { norm: n });
    }
    Ok(())
}

/// min over the first `budget` members T of the projective distance from
/// `p` to T·x, with the index of the first member achieving it.
pub fn min_projective_distance(
    g: &OperatorFamily,
    x: &CVector,
    p: &CVector,
    budget: usize,
    cfg: &ToleranceConfig,
) -> Result<(f64, usize)> {
    if p.dim() != g.dim() {
        return Err(LabError::Dimension {
            expected: g.dim(),
            found: p.dim(),
        });
    }
    let unit = unit_probe(p, cfg)?;
    let orbit = g.orbit(x, budget)?;
    let hit = nearest(&orbit, &unit, cfg.zero_cutoff);
    Ok((hit.distance, hit.member))
}

/// Sweeps a precomputed orbit against every probe.
pub(crate) fn sweep_orbit(
    orbit: &[CVector],
    probes: &ProbeSet,
    cfg: &ToleranceConfig,
    budget: usize,
) -> DensityReport {
    let per_probe: Vec<ProbeHit> = probes
        .probes()
        .par_iter()
        .map(|p| nearest(orbit, p, cfg.zero_cutoff))
        .collect();
    let (worst_probe, worst_case) = per_probe
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bd), (i, h)| {
            if h.distance > bd {
                (i, h.distance)
            } else {
                (bi, bd)
            }
        });
    DensityReport {
        verdict: Verdict::from_bool(worst_case <= cfg.eps_density),
        per_probe,
        worst_case,
        worst_probe,
        members_used: orbit.len(),
        budget,
        eps: cfg.eps_density,
        seed: probes.seed(),
    }
}

/// PASS when every probe lies within `eps_density` of the projective orbit
/// {[T·x] : T ∈ Γ}.
pub fn eps_supercyclic_test(
    g: &OperatorFamily,
    x: &CVector,
    probes: &ProbeSet,
    cfg: &ToleranceConfig,
) -> Result<DensityReport> {
    if probes.dim() != g.dim() {
        return Err(LabError::Dimension {
            expected: g.dim(),
            found: probes.dim(),
        });
    }
    check_nonzero(x, cfg)?;
    let orbit = g.orbit(x, cfg.budget)?;
    Ok(sweep_orbit(&orbit, probes, cfg, cfg.budget))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallVerdict {
    pub inside: bool,
    /// Member whose scaled image lands in the ball, or the nearest member.
    pub member: usize,
    pub distance: f64,
    /// radius/‖center‖, the projective threshold for this ball.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdeltaReport {
    pub balls: Vec<BallVerdict>,
    pub overall: bool,
}

/// Membership of x in ⋂_n ⋃_{β≠0} ⋃_{T∈Γ} T⁻¹(βU_n): some nonzero multiple
/// of T·x lands in U_n exactly when the projective distance from the center
/// c_n to T·x is below r_n/‖c_n‖.
pub fn gdelta_membership(
    g: &OperatorFamily,
    x: &CVector,
    basis: &BallBasis,
    cfg: &ToleranceConfig,
) -> Result<GdeltaReport> {
    for (index, b) in basis.balls().iter().enumerate() {
        if b.center.norm() <= cfg.zero_cutoff {
            return Err(LabError::InvalidBall {
                index,
                reason: "center is zero".into(),
            });
        }
        if b.center.dim() != g.dim() {
            return Err(LabError::Dimension {
                expected: g.dim(),
                found: b.center.dim(),
            });
        }
    }
    let orbit = g.orbit(x, cfg.budget)?;
    let balls: Vec<BallVerdict> = basis
        .balls()
        .par_iter()
        .map(|b| {
            let norm = b.center.norm();
            let unit = b.center.scale(Complex64::new(1.0 / norm, 0.0));
            let hit = nearest(&orbit, &unit, cfg.zero_cutoff);
            let threshold = b.radius / norm;
            BallVerdict {
                inside: hit.distance < threshold,
                member: hit.member,
                distance: hit.distance,
                threshold,
            }
        })
        .collect();
    let overall = balls.iter().all(|b| b.inside);
    Ok(GdeltaReport { balls, overall })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub results: Vec<(CVector, DensityReport)>,
    pub pass_fraction: f64,
}

/// Runs the ε-test on every candidate; the pass fraction is an empirical
/// proxy for density of SC(Γ).
pub fn search_supercyclic_vectors(
    g: &OperatorFamily,
    candidates: &[CVector],
    probes: &ProbeSet,
    cfg: &ToleranceConfig,
) -> Result<SearchReport> {
    let results = candidates
        .iter()
        .map(|x| Ok((x.clone(), eps_supercyclic_test(g, x, probes, cfg)?)))
        .collect::<Result<Vec<_>>>()?;
    let passed = results.iter().filter(|(_, r)| r.verdict.is_pass()).count();
    let pass_fraction = if results.is_empty() {
        0.0
    } else {
        passed as f64 / results.len() as f64
    };
    Ok(SearchReport {
        results,
        pass_fraction,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupertransitiveReport {
    pub verdict: Verdict,
    /// Worst per-probe distance over all samples.
    pub worst_case: f64,
    pub per_sample_worst: Vec<f64>,
    /// Indices of samples that fail the ε-test.
    pub failing: Vec<usize>,
}

/// PASS when every sampled nonzero vector passes the ε-test.
pub fn supertransitive_scan(
    g: &OperatorFamily,
    sample: &[CVector],
    probes: &ProbeSet,
    cfg: &ToleranceConfig,
) -> Result<SupertransitiveReport> {
    let mut per_sample_worst = Vec::with_capacity(sample.len());
    let mut failing = Vec::new();
    for (i, x) in sample.iter().enumerate() {
        let report = eps_supercyclic_test(g, x, probes, cfg)?;
        if !report.verdict.is_pass() {
            failing.push(i);
        }
        per_sample_worst.push(report.worst_case);
    }
    let worst_case = per_sample_worst.iter().copied().fold(0.0, f64::max);
    Ok(SupertransitiveReport {
        verdict: Verdict::from_bool(failing.is_empty()),
        worst_case,
        per_sample_worst,
        failing,
    })
}

/// An operator declared to be the pointwise limit at x of the listed
/// members (in approximation order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeclaredLimit {
    pub operator: DenseOperator,
    pub approximants: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SotReport {
    pub verdict: Verdict,
    /// Largest final relative gap ‖Sx − T_k x‖/‖T_k x‖ over the limits.
    pub delta: f64,
    /// Per probe, min distance over Γ minus min distance over Γ ∪ limits.
    pub improvement: Vec<f64>,
    pub max_improvement: f64,
}

fn relative_gap(sx: &CVector, tx: &CVector, cfg: &ToleranceConfig) -> f64 {
    let ntx = tx.norm();
    let diff = (sx - tx).norm();
    if ntx <= cfg.zero_cutoff {
        if diff <= cfg.zero_cutoff {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / ntx
    }
}

/// Adjoining pointwise limits of members must not bring any probe closer
/// than the final approximation gap δ allows.
pub fn sot_limit_consistency(
    g: &OperatorFamily,
    limits: &[DeclaredLimit],
    x: &CVector,
    probes: &ProbeSet,
    cfg: &ToleranceConfig,
) -> Result<SotReport> {
    check_nonzero(x, cfg)?;
    let orbit = g.orbit(x, cfg.budget)?;
    let mut delta: f64 = 0.0;
    let mut limit_images = Vec::with_capacity(limits.len());
    for (index, limit) in limits.iter().enumerate() {
        let sx = limit.operator.apply(x)?;
        if limit.approximants.is_empty() {
            return Err(LabError::NotALimit {
                index,
                gap: f64::INFINITY,
            });
        }
        let mut gaps = Vec::with_capacity(limit.approximants.len());
        for &k in &limit.approximants {
            let tx = orbit.get(k).ok_or(LabError::Index {
                index: k,
                len: orbit.len(),
            })?;
            gaps.push(relative_gap(&sx, tx, cfg));
        }
        let last = *gaps.last().expect("nonempty");
        let settling = gaps.windows(2).all(|w| w[1] <= w[0] + cfg.tol_residual);
        if !(last <= cfg.eps_density) || !settling {
            return Err(LabError::NotALimit { index, gap: last });
        }
        delta = delta.max(last);
        limit_images.push(sx);
    }
    let base = sweep_orbit(&orbit, probes, cfg, cfg.budget);
    let mut extended = orbit;
    extended.extend(limit_images);
    let with_limits = sweep_orbit(&extended, probes, cfg, cfg.budget);
    let improvement: Vec<f64> = base
        .per_probe
        .iter()
        .zip(&with_limits.per_probe)
        .map(|(a, b)| a.distance - b.distance)
        .collect();
    let max_improvement = improvement.iter().copied().fold(0.0, f64::max);
    Ok(SotReport {
        verdict: Verdict::from_bool(max_improvement <= delta + cfg.tol_residual),
        delta,
        improvement,
        max_improvement,
    })
}
