//! C ABI for `groupoid-avg`.
//!
//! Every fallible entry point returns a [`GaStatus`] code; on anything but
//! `GA_STATUS_OK` a message is available from [`ga_last_error`] on the calling
//! thread. Handles are opaque and must be released with their `_free`
//! function. Strings returned through `char **` are owned by the caller and
//! released with [`ga_string_free`].
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use groupoid_avg::cli::{cmd_avg, cmd_cohomology, cmd_gen, cmd_metric, CohomologyMode, ExitStatus, RunReport};
use groupoid_avg::groupoid::FiniteGroupoid;
use groupoid_avg::io::{parse_json, to_json_string, trace_to_string, GroupoidFile};
use groupoid_avg::scenario::{GroupoidGenerator, Scenario, ScenarioFile};
use groupoid_avg::Error;

/// Status codes. 2 to 4 match the command-line exit codes.
#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaStatus {
    Ok = 0,
    Validation = 2,
    GateRefused = 3,
    Certificate = 4,
    NullPointer = 10,
    Parse = 11,
    Numeric = 12,
    Panic = 13,
}

/// Values accepted as the `mode` of [`ga_cohomology`].
#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaCohomologyMode {
    Contract2Verify = 0,
    Contract1Verify = 1,
    DefectConsistency = 2,
}

/// A validated finite groupoid.
pub struct GaGroupoid {
    inner: FiniteGroupoid,
}

/// A resolved scenario: groupoid, Haar data, metric and pseudo-representation.
pub struct GaScenario {
    inner: Scenario,
}

/// The outcome of an averaging run.
pub struct GaRun {
    report: RunReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

struct Failure(GaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse(_) | Error::Csv(_) => GaStatus::Parse,
            Error::Singular { .. } | Error::SingularMatrix(_) => GaStatus::Numeric,
            other => match ExitStatus::for_error(other) {
                ExitStatus::GateRefused => GaStatus::GateRefused,
                _ => GaStatus::Validation,
            },
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(GaStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<GaStatus, Failure>) -> GaStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {message}"));
            GaStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(GaStatus::Parse, format!("{what} is not UTF-8")))
}

unsafe fn put_string(out: *mut *mut c_char, text: String) -> Result<(), Failure> {
    let c = CString::new(text).map_err(|_| Failure(GaStatus::Parse, "output contains a NUL byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn status_of(exit: ExitStatus) -> GaStatus {
    match exit {
        ExitStatus::Success => GaStatus::Ok,
        ExitStatus::Validation => GaStatus::Validation,
        ExitStatus::GateRefused => GaStatus::GateRefused,
        ExitStatus::Certificate => GaStatus::Certificate,
    }
}

/// Message for the last failure on this thread, or null. Valid until the
/// next `ga_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ga_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn ga_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a groupoid from a generator such as `{"kind": "pair", "n": 3}`.
#[no_mangle]
pub unsafe extern "C" fn ga_groupoid_generate(generator_json: *const c_char, out: *mut *mut GaGroupoid) -> GaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let generator: GroupoidGenerator = parse_json(read_str(generator_json, "generator_json")?, "generator")?;
        let file = cmd_gen(&generator)?;
        let inner = file.to_groupoid()?;
        *out = Box::into_raw(Box::new(GaGroupoid { inner }));
        Ok(GaStatus::Ok)
    })
}

/// Parses and validates a groupoid file.
#[no_mangle]
pub unsafe extern "C" fn ga_groupoid_from_json(json: *const c_char, out: *mut *mut GaGroupoid) -> GaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let file: GroupoidFile = parse_json(read_str(json, "json")?, "groupoid")?;
        let inner = file.to_groupoid()?;
        let report = inner.validate();
        if let Some(v) = report.violations.first() {
            return Err(Failure(GaStatus::Validation, format!("{:?}: {}", v.axiom, v.detail)));
        }
        *out = Box::into_raw(Box::new(GaGroupoid { inner }));
        Ok(GaStatus::Ok)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ga_groupoid_counts(
    g: *const GaGroupoid,
    n_objects: *mut usize,
    n_arrows: *mut usize,
) -> GaStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("groupoid"))?;
        if n_objects.is_null() || n_arrows.is_null() {
            return Err(null("output pointer"));
        }
        *n_objects = g.inner.n_objects();
        *n_arrows = g.inner.n_arrows();
        Ok(GaStatus::Ok)
    })
}

/// The groupoid in its JSON file format.
#[no_mangle]
pub unsafe extern "C" fn ga_groupoid_to_json(g: *const GaGroupoid, out: *mut *mut c_char) -> GaStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("groupoid"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        put_string(out, to_json_string(&GroupoidFile::from_groupoid(&g.inner)))?;
        Ok(GaStatus::Ok)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ga_groupoid_free(g: *mut GaGroupoid) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Parses and resolves a scenario. Relative file references are resolved
/// against `base_dir`, or the working directory when it is null.
#[no_mangle]
pub unsafe extern "C" fn ga_scenario_from_json(
    json: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut GaScenario,
) -> GaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let file = ScenarioFile::parse(read_str(json, "json")?, "scenario")?;
        let base = if base_dir.is_null() { "." } else { read_str(base_dir, "base_dir")? };
        let inner = file.resolve(Path::new(base))?;
        *out = Box::into_raw(Box::new(GaScenario { inner }));
        Ok(GaStatus::Ok)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ga_scenario_load(path: *const c_char, out: *mut *mut GaScenario) -> GaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = Scenario::load(Path::new(read_str(path, "path")?))?;
        *out = Box::into_raw(Box::new(GaScenario { inner }));
        Ok(GaStatus::Ok)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ga_scenario_free(s: *mut GaScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Runs the averaging iteration. A run handle is produced whenever the
/// status is `GA_STATUS_OK`, `GA_STATUS_GATE_REFUSED` or `GA_STATUS_CERTIFICATE`; the status is
/// the run's verdict.
#[no_mangle]
pub unsafe extern "C" fn ga_avg(s: *const GaScenario, out: *mut *mut GaRun) -> GaStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let report = cmd_avg(&s.inner)?;
        let status = status_of(report.status());
        if status != GaStatus::Ok {
            set_last_error(match status {
                GaStatus::GateRefused => {
                    format!("near-representation gate failed: r = {:e} > {:e}", report.gate.r, report.gate.threshold)
                }
                _ => "run did not converge with all certificates holding".to_string(),
            });
        }
        *out = Box::into_raw(Box::new(GaRun { report }));
        Ok(status)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ga_run_report_json(run: *const GaRun, out: *mut *mut c_char) -> GaStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        put_string(out, to_json_string(&run.report))?;
        Ok(GaStatus::Ok)
    })
}

/// Trace CSV; header only for refused runs.
#[no_mangle]
pub unsafe extern "C" fn ga_run_trace_csv(run: *const GaRun, out: *mut *mut c_char) -> GaStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rows = run.report.trace.as_ref().map_or(&[][..], |t| &t.rows[..]);
        put_string(out, trace_to_string(rows))?;
        Ok(GaStatus::Ok)
    })
}

/// `b` and `r` of the final iterate (of the input, for refused runs).
#[no_mangle]
pub unsafe extern "C" fn ga_run_final_defects(run: *const GaRun, b: *mut f64, r: *mut f64) -> GaStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        if b.is_null() || r.is_null() {
            return Err(null("output pointer"));
        }
        let (fb, fr) = match &run.report.final_defects {
            Some(d) => (d.b, d.r),
            None => (run.report.gate.b, run.report.gate.r),
        };
        *b = fb;
        *r = fr;
        Ok(GaStatus::Ok)
    })
}

/// Row-major entries of the final iterate at arrow `arrow`. `len` must be at
/// least `rows·cols`; the shape is written to `rows` and `cols`.
#[no_mangle]
pub unsafe extern "C" fn ga_run_limit_map(
    run: *const GaRun,
    arrow: usize,
    data: *mut f64,
    len: usize,
    rows: *mut usize,
    cols: *mut usize,
) -> GaStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        if rows.is_null() || cols.is_null() {
            return Err(null("shape pointer"));
        }
        let limit = run
            .report
            .limit
            .as_ref()
            .ok_or_else(|| Failure(GaStatus::Validation, "run has no final iterate".into()))?;
        let m = limit.maps().get(arrow).ok_or_else(|| {
            Failure(GaStatus::Validation, format!("arrow {arrow} out of range ({} arrows)", limit.n_arrows()))
        })?;
        *rows = m.rows();
        *cols = m.cols();
        let entries = m.as_slice();
        if data.is_null() || len < entries.len() {
            return Err(Failure(GaStatus::Validation, format!("buffer holds {len} entries, need {}", entries.len())));
        }
        ptr::copy_nonoverlapping(entries.as_ptr(), data, entries.len());
        Ok(GaStatus::Ok)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ga_run_free(run: *mut GaRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Verifies a contraction identity; `mode` is a `GaCohomologyMode` value.
/// Writes the JSON report. The status is `GA_STATUS_CERTIFICATE` when the identity
/// fails.
#[no_mangle]
pub unsafe extern "C" fn ga_cohomology(
    s: *const GaScenario,
    mode: i32,
    seed: u64,
    report_json: *mut *mut c_char,
) -> GaStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        if report_json.is_null() {
            return Err(null("report_json"));
        }
        let mode = match mode {
            m if m == GaCohomologyMode::Contract2Verify as i32 => CohomologyMode::Contract2Verify,
            m if m == GaCohomologyMode::Contract1Verify as i32 => CohomologyMode::Contract1Verify,
            m if m == GaCohomologyMode::DefectConsistency as i32 => CohomologyMode::DefectConsistency,
            other => return Err(Failure(GaStatus::Validation, format!("unknown cohomology mode {other}"))),
        };
        let report = cmd_cohomology(&s.inner, mode, seed)?;
        put_string(report_json, to_json_string(&report))?;
        Ok(status_of(report.status()))
    })
}

/// Averages the scenario metric along its pseudo-representation; writes the
/// JSON report.
#[no_mangle]
pub unsafe extern "C" fn ga_metric(s: *const GaScenario, report_json: *mut *mut c_char) -> GaStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        if report_json.is_null() {
            return Err(null("report_json"));
        }
        let report = cmd_metric(&s.inner)?;
        put_string(report_json, to_json_string(&report))?;
        Ok(status_of(report.status()))
    })
}
