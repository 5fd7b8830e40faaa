//! JSON scenario configs, dispatch to the checkers, and the reports the
//! command-line tool writes.
//!
//! A scenario names one family, one test and whatever inputs that test
//! needs. Anything random (probes, sample vectors, pairs) is drawn from the
//! scenario seed, so the same config and seed always give byte-identical
//! JSON apart from `wall_time_ms`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::criterion::{rolewicz_truncated_family, verify_criterion, CriterionData};
use crate::density::{
    eps_supercyclic_test, gdelta_membership, supertransitive_scan, Ball, BallBasis, ProbeSet,
    DEFAULT_PROBE_SEED,
};
use crate::error::{LabError, Result};
use crate::families::{IntertwiningMap, OperatorFamily};
use crate::numerics::{CVector, DenseOperator, ToleranceConfig};
use crate::semigroups::{
    annular_z_grid, group_axioms_check, nonvanishing_orbit_check, regularized_group_grid,
    rescale_semigroup, semigroup_grid, tail_density_check, RegularizedGroupGrid, RescaleParams,
    SemigroupGrid,
};
use crate::transitivity::{
    completion_oracle_family, factorization_property_test, strict_transitivity_test,
    transitive_pair_test,
};

/// Probe count used when a scenario does not declare its probes.
pub const DEFAULT_PROBE_COUNT: usize = 500;

/// Largest semigroup-law residual accepted by the `semigroup` test.
pub const SEMIGROUP_LAW_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Sc,
    Transitive,
    Strict,
    Supertransitive,
    Gdelta,
    Criterion,
    Semigroup,
    Group,
    Tail,
}

impl TestKind {
    pub const ALL: [TestKind; 9] = [
        TestKind::Sc,
        TestKind::Transitive,
        TestKind::Strict,
        TestKind::Supertransitive,
        TestKind::Gdelta,
        TestKind::Criterion,
        TestKind::Semigroup,
        TestKind::Group,
        TestKind::Tail,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Sc => "sc",
            TestKind::Transitive => "transitive",
            TestKind::Strict => "strict",
            TestKind::Supertransitive => "supertransitive",
            TestKind::Gdelta => "gdelta",
            TestKind::Criterion => "criterion",
            TestKind::Semigroup => "semigroup",
            TestKind::Group => "group",
            TestKind::Tail => "tail",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        TestKind::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown test '{s}'")))
    }
}

/// The points of a regularized-group grid: either listed or annular.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZGridSpec {
    Points(Vec<Complex64>),
    Annular {
        r_min: f64,
        r_max: f64,
        n_moduli: usize,
        n_args: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    FiniteList {
        members: Vec<DenseOperator>,
    },
    PowersOf {
        base: DenseOperator,
        max_exponent: usize,
    },
    Identity {
        dim: usize,
    },
    /// {diag(1, w)} over the square grid |Re w|, |Im w| ≤ half_width.
    DiagGrid {
        half_width: f64,
        step: f64,
    },
    Scaled {
        base: Box<FamilySpec>,
        scalars: Vec<Complex64>,
    },
    DirectSum {
        components: Vec<FamilySpec>,
    },
    /// φ·T·φ⁻¹ for every member T of the base family.
    Conjugated {
        base: Box<FamilySpec>,
        phi: DenseOperator,
    },
    SemigroupGrid {
        generator: DenseOperator,
        step: f64,
        count: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rescale: Option<RescaleParams>,
    },
    RegularizedGroupGrid {
        generator: DenseOperator,
        regularizer: DenseOperator,
        z_grid: ZGridSpec,
    },
    /// One completion operator I + (y − x)x*/‖x‖² per pair.
    CompletionOracle {
        pairs: Vec<(CVector, CVector)>,
    },
    /// Powers of λ·B for the backward shift B on ℂ^dim.
    TruncatedShift {
        dim: usize,
        lambda: Complex64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbeSpec {
    Generated { count: usize },
    Explicit { vectors: Vec<CVector> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum CriterionSpec {
    Explicit { data: CriterionData },
    /// The truncated weighted backward shift together with its own family.
    Rolewicz { dim: usize, lambda: Complex64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub id: String,
    /// May be left out when the test is chosen on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<TestKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<CVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<CVector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_vectors: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<(CVector, CVector)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_pairs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<ProbeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balls: Option<Vec<Ball>>,
    /// Radius of the probe-centered balls, relative to the probe norm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<CriterionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(default)]
    pub tolerance: ToleranceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_PROBE_SEED)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "ERROR")]
    Error,
}

impl Outcome {
    fn from_bool(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    /// 0 PASS, 1 FAIL, 3 ERROR.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Error => 3,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Error => "ERROR",
        })
    }
}

/// Evidence attached to a verdict: which member, vector or scalar realized
/// the reported value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub member: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<CVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl Witness {
    fn new(label: &str) -> Self {
        Self {
            label: label.into(),
            index: None,
            member: None,
            vector: None,
            alpha: None,
            value: None,
        }
    }

    fn index(mut self, i: usize) -> Self {
        self.index = Some(i);
        self
    }

    fn member(mut self, m: usize) -> Self {
        self.member = Some(m);
        self
    }

    fn vector(mut self, v: CVector) -> Self {
        self.vector = Some(v);
        self
    }

    fn alpha(mut self, a: Complex64) -> Self {
        self.alpha = Some(a);
        self
    }

    fn value(mut self, v: f64) -> Self {
        self.value = v.is_finite().then_some(v);
        self
    }
}

/// One row of plot data: a probe (or ball) and its nearest orbit point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub probe: usize,
    pub distance: f64,
    pub member: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub scenario_id: String,
    pub test: TestKind,
    pub verdict: Outcome,
    pub worst_case: Option<f64>,
    pub witnesses: Vec<Witness>,
    pub per_probe: Vec<ProbeRow>,
    pub budget: usize,
    pub seed: u64,
    pub wall_time_ms: f64,
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl VerdictReport {
    fn empty(config: &ScenarioConfig, test: TestKind) -> Self {
        Self {
            scenario_id: config.id.clone(),
            test,
            verdict: Outcome::Error,
            worst_case: None,
            witnesses: Vec::new(),
            per_probe: Vec::new(),
            budget: config.tolerance.budget,
            seed: config.seed_or_default(),
            wall_time_ms: 0.0,
            metrics: BTreeMap::new(),
            error: None,
        }
    }

    /// A report for a scenario that stopped on a numerical error.
    pub fn from_error(config: &ScenarioConfig, test: TestKind, err: &LabError) -> Self {
        let mut report = Self::empty(config, test);
        report.error = Some(err.to_string());
        report
    }

    fn metric(&mut self, name: &str, value: f64) {
        if value.is_finite() {
            self.metrics.insert(name.into(), value);
        }
    }

    fn worst(&mut self, value: f64) {
        self.worst_case = value.is_finite().then_some(value);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    CsvPlot,
}

impl FromStr for ReportFormat {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv-plot" => Ok(ReportFormat::CsvPlot),
            other => Err(LabError::Config(format!("unknown format '{other}'"))),
        }
    }
}

/// JSON is the full report; csv-plot is a header plus one
/// `probe,min_distance,member` row per probe.
pub fn emit_report(report: &VerdictReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report).expect("reports always serialize");
            out.push(b'\n');
            out
        }
        ReportFormat::CsvPlot => {
            let mut out = String::from("probe,min_distance,member\n");
            for row in &report.per_probe {
                out.push_str(&format!("{},{},{}\n", row.probe, row.distance, row.member));
            }
            out.into_bytes()
        }
    }
}

/// Family plus the grid objects some tests need beyond the members.
struct Built {
    family: OperatorFamily,
    semigroup: Option<SemigroupGrid>,
    group: Option<RegularizedGroupGrid>,
}

impl Built {
    fn plain(family: OperatorFamily) -> Self {
        Self {
            family,
            semigroup: None,
            group: None,
        }
    }
}

fn config_err(e: LabError) -> LabError {
    match e {
        LabError::Config(_) | LabError::Numerical(_) => e,
        other => LabError::Config(other.to_string()),
    }
}

fn build_family(spec: &FamilySpec, cfg: &ToleranceConfig) -> Result<Built> {
    let built = match spec {
        FamilySpec::FiniteList { members } => Built::plain(OperatorFamily::finite(members.clone())?),
        FamilySpec::PowersOf { base, max_exponent } => {
            Built::plain(OperatorFamily::powers_of(base.clone(), *max_exponent))
        }
        FamilySpec::Identity { dim } => {
            if *dim < 2 {
                return Err(LabError::Dimension {
                    expected: 2,
                    found: *dim,
                });
            }
            Built::plain(OperatorFamily::identity(*dim))
        }
        FamilySpec::DiagGrid { half_width, step } => {
            Built::plain(OperatorFamily::diagonal_grid(*half_width, *step)?)
        }
        FamilySpec::Scaled { base, scalars } => {
            Built::plain(build_family(base, cfg)?.family.scale_members(scalars)?)
        }
        FamilySpec::DirectSum { components } => {
            let families = components
                .iter()
                .map(|c| Ok(build_family(c, cfg)?.family))
                .collect::<Result<Vec<_>>>()?;
            Built::plain(OperatorFamily::direct_sum(&families)?)
        }
        FamilySpec::Conjugated { base, phi } => {
            let map = IntertwiningMap::new(phi.clone(), cfg);
            map.inverse()?;
            Built::plain(build_family(base, cfg)?.family.conjugate_similar(&map)?)
        }
        FamilySpec::SemigroupGrid {
            generator,
            step,
            count,
            rescale,
        } => {
            let grid = semigroup_grid(generator, *step, *count)?;
            let family = match rescale {
                Some(p) => rescale_semigroup(&grid, *p)?,
                None => grid.family(),
            };
            Built {
                family,
                semigroup: Some(grid),
                group: None,
            }
        }
        FamilySpec::RegularizedGroupGrid {
            generator,
            regularizer,
            z_grid,
        } => {
            let points = match z_grid {
                ZGridSpec::Points(p) => p.clone(),
                ZGridSpec::Annular {
                    r_min,
                    r_max,
                    n_moduli,
                    n_args,
                } => annular_z_grid(*r_min, *r_max, *n_moduli, *n_args)?,
            };
            let grid = regularized_group_grid(generator, regularizer, &points)?;
            Built {
                family: grid.family(),
                semigroup: None,
                group: Some(grid),
            }
        }
        FamilySpec::CompletionOracle { pairs } => Built::plain(completion_oracle_family(pairs)?),
        FamilySpec::TruncatedShift { dim, lambda } => {
            let b = crate::criterion::backward_shift(*dim).scale(*lambda);
            Built::plain(OperatorFamily::powers_of(b, *dim))
        }
    };
    Ok(built)
}

/// Everything a test may draw on, resolved and dimension-checked.
struct Inputs {
    built: Built,
    cfg: ToleranceConfig,
    seed: u64,
    criterion: Option<CriterionData>,
}

fn sample_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

fn check_dim(v: &CVector, dim: usize) -> Result<()> {
    if v.dim() != dim {
        return Err(LabError::Dimension {
            expected: dim,
            found: v.dim(),
        });
    }
    Ok(())
}

fn resolve(config: &ScenarioConfig) -> Result<Inputs> {
    let cfg = config.tolerance;
    cfg.validate()?;
    let seed = config.seed_or_default();
    let (built, criterion) = match (&config.family, &config.criterion) {
        (Some(_), Some(CriterionSpec::Rolewicz { .. })) => {
            return Err(LabError::Config(
                "a rolewicz criterion brings its own family; drop `family`".into(),
            ))
        }
        (None, Some(CriterionSpec::Rolewicz { dim, lambda })) => {
            let (family, data) = rolewicz_truncated_family(*dim, *lambda)?;
            (Built::plain(family), Some(data))
        }
        (Some(spec), crit) => {
            let data = match crit {
                Some(CriterionSpec::Explicit { data }) => Some(data.clone()),
                _ => None,
            };
            (build_family(spec, &cfg)?, data)
        }
        (None, _) => return Err(LabError::Config("missing `family`".into())),
    };
    let dim = built.family.dim();
    for v in config
        .vector
        .iter()
        .chain(config.vectors.iter().flatten())
        .chain(config.pairs.iter().flatten().flat_map(|(x, y)| [x, y]))
        .chain(config.balls.iter().flatten().map(|b| &b.center))
    {
        check_dim(v, dim)?;
    }
    if let Some(ProbeSpec::Explicit { vectors }) = &config.probes {
        for v in vectors {
            check_dim(v, dim)?;
        }
    }
    Ok(Inputs {
        built,
        cfg,
        seed,
        criterion,
    })
}

fn require<'a, T>(value: &'a Option<T>, name: &str, test: TestKind) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| LabError::Config(format!("test '{test}' needs `{name}`")))
}

fn probe_set(config: &ScenarioConfig, inputs: &Inputs) -> Result<ProbeSet> {
    let dim = inputs.built.family.dim();
    match &config.probes {
        None => ProbeSet::generate(dim, DEFAULT_PROBE_COUNT.max(2 * dim), inputs.seed),
        Some(ProbeSpec::Generated { count }) => ProbeSet::generate(dim, *count, inputs.seed),
        Some(ProbeSpec::Explicit { vectors }) => ProbeSet::from_vectors(vectors.clone(), &inputs.cfg),
    }
    .map_err(config_err)
}

fn sample_vectors(config: &ScenarioConfig, inputs: &Inputs, test: TestKind) -> Result<Vec<CVector>> {
    if let Some(v) = &config.vectors {
        return Ok(v.clone());
    }
    let count = *require(&config.random_vectors, "vectors` or `random_vectors", test)?;
    let dim = inputs.built.family.dim();
    let mut rng = sample_rng(inputs.seed);
    Ok((0..count).map(|_| CVector::random_unit(dim, &mut rng)).collect())
}

fn sample_pairs(
    config: &ScenarioConfig,
    inputs: &Inputs,
    test: TestKind,
) -> Result<Vec<(CVector, CVector)>> {
    if let Some(p) = &config.pairs {
        return Ok(p.clone());
    }
    let count = *require(&config.random_pairs, "pairs` or `random_pairs", test)?;
    let dim = inputs.built.family.dim();
    let mut rng = sample_rng(inputs.seed);
    Ok((0..count)
        .map(|_| {
            let x = CVector::random_unit(dim, &mut rng);
            (x, CVector::random_unit(dim, &mut rng))
        })
        .collect())
}

/// Validates the config, runs the selected test and fills in a report.
/// Problems with the config itself come back as [`LabError::Config`];
/// failures while computing keep their own variant.
pub fn run_scenario(config: &ScenarioConfig) -> Result<VerdictReport> {
    let test = config
        .test
        .ok_or_else(|| LabError::Config("no test selected".into()))?;
    let start = Instant::now();
    let inputs = resolve(config).map_err(config_err)?;
    let mut report = VerdictReport::empty(config, test);
    report.budget = inputs.cfg.budget;
    report.seed = inputs.seed;
    report.metric("eps_density", inputs.cfg.eps_density);
    report.metric("family_size", inputs.built.family.len() as f64);
    dispatch(config, &inputs, test, &mut report)?;
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

fn dispatch(
    config: &ScenarioConfig,
    inputs: &Inputs,
    test: TestKind,
    report: &mut VerdictReport,
) -> Result<()> {
    let g = &inputs.built.family;
    let cfg = &inputs.cfg;
    match test {
        TestKind::Sc => {
            let x = require(&config.vector, "vector", test)?;
            let probes = probe_set(config, inputs)?;
            let r = eps_supercyclic_test(g, x, &probes, cfg)?;
            report.verdict = Outcome::from_bool(r.verdict.is_pass());
            report.worst(r.worst_case);
            let worst_hit = r.per_probe[r.worst_probe];
            report.witnesses.push(
                Witness::new("worst_probe")
                    .index(r.worst_probe)
                    .member(worst_hit.member)
                    .vector(probes.probes()[r.worst_probe].clone())
                    .value(r.worst_case),
            );
            report.per_probe = rows(r.per_probe.iter().map(|h| (h.distance, h.member)));
            report.metric("probes", probes.len() as f64);
            report.metric("members_used", r.members_used as f64);
        }
        TestKind::Transitive => {
            let pairs = sample_pairs(config, inputs, test)?;
            let radius = config.w_radius.unwrap_or(cfg.eps_density);
            let mut successes = 0;
            let mut worst: f64 = 0.0;
            for (i, (x, y)) in pairs.iter().enumerate() {
                let r = transitive_pair_test(g, x, y, radius, cfg)?;
                successes += usize::from(r.success);
                worst = worst.max(r.distance);
                report.witnesses.push(
                    Witness::new(if r.success { "connected" } else { "unconnected" })
                        .index(i)
                        .member(r.member)
                        .vector(r.z)
                        .alpha(r.alpha)
                        .value(r.distance),
                );
            }
            report.verdict = Outcome::from_bool(successes == pairs.len());
            report.worst(worst);
            report.metric("pairs", pairs.len() as f64);
            report.metric("successes", successes as f64);
            report.metric("w_radius", radius);
        }
        TestKind::Strict => {
            let pairs = sample_pairs(config, inputs, test)?;
            let r = strict_transitivity_test(g, &pairs, cfg)?;
            report.verdict = Outcome::from_bool(r.verdict.is_pass());
            report.worst(r.max_residual);
            for (i, w) in r.pairs.iter().enumerate() {
                report.witnesses.push(
                    Witness::new(if w.connected { "connected" } else { "unconnected" })
                        .index(i)
                        .member(w.member)
                        .alpha(w.alpha)
                        .value(w.relative_residual),
                );
            }
            report.metric("pairs", pairs.len() as f64);
            report.metric("failing", r.failing.len() as f64);
        }
        TestKind::Supertransitive => {
            let sample = sample_vectors(config, inputs, test)?;
            let probes = probe_set(config, inputs)?;
            let r = supertransitive_scan(g, &sample, &probes, cfg)?;
            report.verdict = Outcome::from_bool(r.verdict.is_pass());
            report.worst(r.worst_case);
            for &i in &r.failing {
                report.witnesses.push(
                    Witness::new("failing_sample")
                        .index(i)
                        .vector(sample[i].clone())
                        .value(r.per_sample_worst[i]),
                );
            }
            report.metric("samples", sample.len() as f64);
            report.metric("failing", r.failing.len() as f64);
        }
        TestKind::Gdelta => {
            let x = require(&config.vector, "vector", test)?;
            let basis = match &config.balls {
                Some(balls) => BallBasis::new(balls.clone(), cfg).map_err(config_err)?,
                None => BallBasis::matched_to_probes(
                    &probe_set(config, inputs)?,
                    config.matched_radius.unwrap_or(cfg.eps_density),
                ),
            };
            let r = gdelta_membership(g, x, &basis, cfg)?;
            report.verdict = Outcome::from_bool(r.overall);
            report.worst(r.balls.iter().map(|b| b.distance).fold(0.0, f64::max));
            for (i, b) in r.balls.iter().enumerate().filter(|(_, b)| !b.inside) {
                report
                    .witnesses
                    .push(Witness::new("missed_ball").index(i).member(b.member).value(b.distance));
            }
            report.per_probe = rows(r.balls.iter().map(|b| (b.distance, b.member)));
            report.metric("balls", r.balls.len() as f64);
            report.metric(
                "balls_missed",
                r.balls.iter().filter(|b| !b.inside).count() as f64,
            );
        }
        TestKind::Criterion => {
            let data = require(&inputs.criterion, "criterion", test)?;
            let r = verify_criterion(g, data, cfg)?;
            report.verdict = Outcome::from_bool(r.verdict.is_pass());
            let p = &r.profile;
            let finals = [&p.scaled_orbit, &p.scaled_right_inverse, &p.reconstruction]
                .map(|c| *c.last().expect("nonempty profile"));
            report.worst(finals.iter().copied().fold(0.0, f64::max));
            for (name, (value, converged)) in ["scaled_orbit", "scaled_right_inverse", "reconstruction"]
                .iter()
                .zip(finals.iter().zip(p.converged))
            {
                report.metric(&format!("final_{name}"), *value);
                report.metric(&format!("converged_{name}"), f64::from(u8::from(converged)));
            }
            report.metric("indices", p.indices.len() as f64);
        }
        TestKind::Semigroup => {
            let grid = inputs.built.semigroup.as_ref().ok_or_else(|| {
                LabError::Config("test 'semigroup' needs a semigroup_grid family".into())
            })?;
            let law = grid.law_residual();
            let f = factorization_property_test(&grid.family(), cfg);
            report.verdict = Outcome::from_bool(law <= SEMIGROUP_LAW_TOL && f.verdict.is_pass());
            report.worst(law);
            for &(i, j) in &f.unwitnessed {
                report
                    .witnesses
                    .push(Witness::new("unfactored_pair").index(i).member(j));
            }
            report.metric("law_residual", law);
            report.metric("law_tolerance", SEMIGROUP_LAW_TOL);
            report.metric("factorization_residual", f.max_residual);
            report.metric("factorization_pairs", f.pairs_checked as f64);
        }
        TestKind::Group => {
            let grid = inputs.built.group.as_ref().ok_or_else(|| {
                LabError::Config("test 'group' needs a regularized_group_grid family".into())
            })?;
            let axioms = group_axioms_check(grid, cfg);
            let mut pass = axioms.verdict.is_pass();
            report.worst(axioms.max_residual);
            if let Some((z, w)) = axioms.worst_pair {
                report.witnesses.push(Witness::new("worst_pair_z").alpha(z).value(axioms.max_residual));
                report.witnesses.push(Witness::new("worst_pair_w").alpha(w));
            }
            if let Some(x) = &config.vector {
                let nv = nonvanishing_orbit_check(grid, x, cfg)?;
                pass &= nv.verdict.is_pass();
                report
                    .witnesses
                    .push(Witness::new("min_orbit_norm").alpha(nv.argmin).value(nv.min_norm));
                report.metric("min_orbit_norm", nv.min_norm);
            }
            report.verdict = Outcome::from_bool(pass);
            report.metric("axiom_threshold", axioms.threshold);
            report.metric("pairs_checked", axioms.pairs_checked as f64);
            report.metric("nontrivial_pairs", axioms.nontrivial_pairs as f64);
            report.metric("commutation_defect", axioms.commutation_defect);
        }
        TestKind::Tail => {
            let grid = inputs.built.group.as_ref().ok_or_else(|| {
                LabError::Config("test 'tail' needs a regularized_group_grid family".into())
            })?;
            let x = require(&config.vector, "vector", test)?;
            let probes = probe_set(config, inputs)?;
            let omega0 = config.omega0.unwrap_or(0.0);
            let r = tail_density_check(grid, x, omega0, &probes, cfg)?;
            report.verdict = Outcome::from_bool(r.tail.verdict.is_pass());
            report.worst(r.tail.worst_case);
            report.per_probe = rows(r.tail.per_probe.iter().map(|h| (h.distance, h.member)));
            report.metric("omega0", omega0);
            report.metric("tail_members", r.tail_members as f64);
            report.metric("full_worst_case", r.full.worst_case);
            report.metric("full_pass", f64::from(u8::from(r.full.verdict.is_pass())));
        }
    }
    Ok(())
}

fn rows(hits: impl Iterator<Item = (f64, usize)>) -> Vec<ProbeRow> {
    hits.enumerate()
        .map(|(probe, (distance, member))| ProbeRow {
            probe,
            distance,
            member,
        })
        .collect()
}
