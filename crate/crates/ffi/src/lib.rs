//! C ABI for the supercyclic laboratory.
//!
//! Operators and families are opaque handles created and freed through
//! this API. Every fallible call returns an [`ScStatus`]; on anything other
//! than `SC_STATUS_OK` a message is available from [`sc_last_error`] on the
//! same thread until the next failing call. Complex numbers cross the
//! boundary as [`ScComplex`] pairs, matrices as row-major arrays of them.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use supercyclic::density::{eps_supercyclic_test, ProbeSet};
use supercyclic::families::OperatorFamily;
use supercyclic::numerics::projective_distance;
use supercyclic::scenario::{emit_report, run_scenario, ReportFormat, ScenarioConfig, VerdictReport};
use supercyclic::{CVector, Complex64, DenseOperator, LabError, ToleranceConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScComplex {
    pub re: f64,
    pub im: f64,
}

impl From<ScComplex> for Complex64 {
    fn from(z: ScComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Outcome of an ε-supercyclicity test.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScDensitySummary {
    pub pass: bool,
    pub worst_case: f64,
    pub worst_probe: usize,
    pub worst_member: usize,
    pub members_used: usize,
}

/// Opaque square complex matrix.
pub struct ScOperator(DenseOperator);

/// Opaque operator family.
pub struct ScFamily(OperatorFamily);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn status_of(err: &LabError) -> ScStatus {
    match err {
        LabError::Config(_) => ScStatus::Config,
        LabError::Numerical(_)
        | LabError::ZeroVector { .. }
        | LabError::ZeroProbe { .. }
        | LabError::NotInvertible { .. }
        | LabError::NotALimit { .. }
        | LabError::EmptyTail { .. } => ScStatus::Numerical,
        _ => ScStatus::InvalidArgument,
    }
}

// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (ScStatus, String)>) -> ScStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ScStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ScStatus::Panic
        }
    }
}

fn lab(err: LabError) -> (ScStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(name: &str) -> (ScStatus, String) {
    (ScStatus::NullPointer, format!("{name} is null"))
}

unsafe fn complex_slice<'a>(data: *const ScComplex, len: usize, name: &str) -> Result<&'a [ScComplex], (ScStatus, String)> {
    if data.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn vector(data: *const ScComplex, dim: usize, name: &str) -> Result<CVector, (ScStatus, String)> {
    let entries = complex_slice(data, dim, name)?;
    CVector::new(entries.iter().map(|&z| z.into()).collect()).map_err(lab)
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), (ScStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn sc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a `dim`×`dim` operator from `dim*dim` row-major entries.
///
/// # Safety
/// `entries` must point to `dim*dim` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_operator_new(
    dim: usize,
    entries: *const ScComplex,
    out: *mut *mut ScOperator,
) -> ScStatus {
    guard(|| {
        let len = dim
            .checked_mul(dim)
            .ok_or((ScStatus::InvalidArgument, "dimension overflows".to_string()))?;
        let flat = complex_slice(entries, len, "entries")?;
        if flat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err((ScStatus::InvalidArgument, "entries must be finite".to_string()));
        }
        let rows = flat
            .chunks(dim.max(1))
            .map(|row| row.iter().map(|&z| z.into()).collect())
            .collect();
        let op = DenseOperator::from_rows(rows).map_err(lab)?;
        write_out(out, Box::into_raw(Box::new(ScOperator(op))), "out")
    })
}

/// # Safety
/// `op` must be null or a handle from [`sc_operator_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sc_operator_free(op: *mut ScOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Projective distance from `u` to the line spanned by `v`, both of
/// length `dim`.
///
/// # Safety
/// `u` and `v` must point to `dim` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_projective_distance(
    u: *const ScComplex,
    v: *const ScComplex,
    dim: usize,
    out: *mut f64,
) -> ScStatus {
    guard(|| {
        let u = vector(u, dim, "u")?;
        let v = vector(v, dim, "v")?;
        let d = projective_distance(&u, &v, &ToleranceConfig::default()).map_err(lab)?;
        write_out(out, d, "out")
    })
}

unsafe fn new_family(family: OperatorFamily, out: *mut *mut ScFamily) -> Result<(), (ScStatus, String)> {
    write_out(out, Box::into_raw(Box::new(ScFamily(family))), "out")
}

/// The family {diag(1, w)} over the square grid |Re w|, |Im w| ≤ `half_width`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_family_diagonal_grid(
    half_width: f64,
    step: f64,
    out: *mut *mut ScFamily,
) -> ScStatus {
    guard(|| new_family(OperatorFamily::diagonal_grid(half_width, step).map_err(lab)?, out))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_family_identity(dim: usize, out: *mut *mut ScFamily) -> ScStatus {
    guard(|| {
        if dim < 2 {
            return Err(lab(LabError::Dimension { expected: 2, found: dim }));
        }
        new_family(OperatorFamily::identity(dim), out)
    })
}

/// A family holding copies of `count` operators. The operators remain
/// owned by the caller.
///
/// # Safety
/// `ops` must point to `count` valid operator handles and `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sc_family_finite(
    ops: *const *const ScOperator,
    count: usize,
    out: *mut *mut ScFamily,
) -> ScStatus {
    guard(|| {
        if ops.is_null() {
            return Err(null("ops"));
        }
        let members = std::slice::from_raw_parts(ops, count)
            .iter()
            .map(|&p| p.as_ref().map(|op| op.0.clone()).ok_or_else(|| null("operator handle")))
            .collect::<Result<Vec<_>, _>>()?;
        new_family(OperatorFamily::finite(members).map_err(lab)?, out)
    })
}

/// The family {I, T, T², …, T^max_exponent}.
///
/// # Safety
/// `base` must be a valid operator handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_family_powers_of(
    base: *const ScOperator,
    max_exponent: usize,
    out: *mut *mut ScFamily,
) -> ScStatus {
    guard(|| {
        let base = base.as_ref().ok_or_else(|| null("base"))?;
        new_family(OperatorFamily::powers_of(base.0.clone(), max_exponent), out)
    })
}

/// Number of members, or 0 for a null handle.
///
/// # Safety
/// `family` must be null or a valid family handle.
#[no_mangle]
pub unsafe extern "C" fn sc_family_len(family: *const ScFamily) -> usize {
    family.as_ref().map_or(0, |f| f.0.len())
}

/// Ambient dimension, or 0 for a null handle.
///
/// # Safety
/// `family` must be null or a valid family handle.
#[no_mangle]
pub unsafe extern "C" fn sc_family_dim(family: *const ScFamily) -> usize {
    family.as_ref().map_or(0, |f| f.0.dim())
}

/// # Safety
/// `family` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sc_family_free(family: *mut ScFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// ε-supercyclicity of `x` against `probe_count` probes drawn from `seed`,
/// using at most `budget` members (0 keeps the default budget).
///
/// # Safety
/// `family` must be a valid handle, `x` must point to `dim` values and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_eps_supercyclic_test(
    family: *const ScFamily,
    x: *const ScComplex,
    dim: usize,
    probe_count: usize,
    seed: u64,
    eps: f64,
    budget: usize,
    out: *mut ScDensitySummary,
) -> ScStatus {
    guard(|| {
        let family = &family.as_ref().ok_or_else(|| null("family"))?.0;
        let x = vector(x, dim, "x")?;
        let mut cfg = ToleranceConfig::default().with_eps(eps);
        if budget > 0 {
            cfg = cfg.with_budget(budget);
        }
        cfg.validate().map_err(lab)?;
        let probes = ProbeSet::generate(family.dim(), probe_count, seed).map_err(lab)?;
        let report = eps_supercyclic_test(family, &x, &probes, &cfg).map_err(lab)?;
        let summary = ScDensitySummary {
            pass: report.verdict.is_pass(),
            worst_case: report.worst_case,
            worst_probe: report.worst_probe,
            worst_member: report.per_probe[report.worst_probe].member,
            members_used: report.members_used,
        };
        write_out(out, summary, "out")
    })
}

/// Runs a JSON scenario config and returns the JSON report through
/// `report_json` (free it with [`sc_string_free`]) together with the
/// command-line exit code: 0 PASS, 1 FAIL, 2 config error, 3 numerical
/// error. A numerical error still produces an ERROR report and returns
/// `SC_STATUS_OK`; a config error produces no report.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `report_json` and
/// `exit_code` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_run_scenario_json(
    config_json: *const c_char,
    report_json: *mut *mut c_char,
    exit_code: *mut i32,
) -> ScStatus {
    guard(|| {
        if config_json.is_null() {
            return Err(null("config_json"));
        }
        if report_json.is_null() || exit_code.is_null() {
            return Err(null("output pointer"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| (ScStatus::Config, format!("config is not UTF-8: {e}")))?;
        let config = ScenarioConfig::from_json(text).map_err(|e| {
            exit_code.write(e.exit_code());
            lab(e)
        })?;
        let test = config
            .test
            .ok_or_else(|| (ScStatus::Config, "config must name its test".to_string()))
            .inspect_err(|_| exit_code.write(2))?;
        let report = match run_scenario(&config) {
            Ok(r) => r,
            Err(e @ LabError::Config(_)) => {
                exit_code.write(2);
                return Err(lab(e));
            }
            Err(e) => VerdictReport::from_error(&config, test, &e),
        };
        let bytes = emit_report(&report, ReportFormat::Json);
        let json = CString::new(bytes).expect("JSON has no interior NULs");
        report_json.write(json.into_raw());
        exit_code.write(report.verdict.exit_code());
        Ok(())
    })
}
