//! C ABI over the asv-apf simulator.
//!
//! Scenarios and results cross the boundary as opaque handles. Every entry
//! point returns an `AsvStatus`; on failure the message is kept per thread and
//! read back with `asv_last_error`. Strings handed out by the library must be
//! released with `asv_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::ptr;
use std::sync::Arc;

use asv_apf::io::ResultDocument;
use asv_apf::mmg::ShipModel;
use asv_apf::montecarlo::{self, BatchSpec, BatchSummary, EnvSpec};
use asv_apf::scenario::{Method, Scenario};
use asv_apf::sim::{self, Mode, Outcome, SimResult};
use asv_apf::Error;

/// Status returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsvStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Malformed input: bad JSON, invalid UTF-8, failed validation.
    InvalidArgument = 2,
    /// The simulation itself failed, for example a diverged state.
    Simulation = 3,
    /// A file could not be read.
    Io = 4,
    /// An index was out of range.
    OutOfRange = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsvMethod {
    Mvortex = 0,
    Sinkvortex = 1,
    Inverse = 2,
    Vo = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsvOutcome {
    Success = 0,
    Collision = 1,
    Timeout = 2,
}

/// Per-agent summary. Missing optional metrics are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AsvAgentSummary {
    pub id: u32,
    pub method: AsvMethod,
    pub outcome: AsvOutcome,
    pub end_time: f64,
    pub ce: f64,
    pub mcte: f64,
    pub time_to_goal: f64,
    pub min_separation: f64,
    pub min_clearance: f64,
    pub max_vortex: f64,
}

/// One trajectory sample. `mode` is 0 for ILOS, 1 for reactive.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AsvSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub u: f64,
    pub v: f64,
    pub r: f64,
    pub delta: f64,
    pub delta_c: f64,
    pub psi_d: f64,
    pub y_e: f64,
    pub mode: u8,
}

/// Parsed, validated scenario.
pub struct AsvScenario {
    scenario: Scenario,
    base_dir: Option<PathBuf>,
}

/// Completed simulation.
pub struct AsvResult {
    name: Option<String>,
    result: SimResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let mut msg = msg.into();
    msg.retain(|c| c != '\0');
    let c = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(AsvStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Io { .. } => AsvStatus::Io,
            Error::Diverged { .. } | Error::SingularMass(_) | Error::NoBracket { .. } | Error::NonFinite(_) => {
                AsvStatus::Simulation
            }
            _ => AsvStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AsvStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, converting errors and panics into a status and last-error message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AsvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            clear_last_error();
            AsvStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            AsvStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller passes a NUL-terminated string that outlives this call.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|e| Failure(AsvStatus::InvalidArgument, format!("`{what}` is not UTF-8: {e}")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: caller passes a valid, writable pointer or null.
    unsafe { p.as_mut() }.ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: caller passes a live handle or null.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Failure(AsvStatus::InvalidArgument, e.to_string()))
}

fn method_to_c(m: Method) -> AsvMethod {
    match m {
        Method::ModifiedVortex => AsvMethod::Mvortex,
        Method::SinkVortex => AsvMethod::Sinkvortex,
        Method::InverseSquare => AsvMethod::Inverse,
        Method::VelocityObstacle => AsvMethod::Vo,
    }
}

fn method_from_c(m: AsvMethod) -> Method {
    match m {
        AsvMethod::Mvortex => Method::ModifiedVortex,
        AsvMethod::Sinkvortex => Method::SinkVortex,
        AsvMethod::Inverse => Method::InverseSquare,
        AsvMethod::Vo => Method::VelocityObstacle,
    }
}

fn outcome_to_c(o: Outcome) -> AsvOutcome {
    match o {
        Outcome::Success => AsvOutcome::Success,
        Outcome::Collision => AsvOutcome::Collision,
        Outcome::Timeout => AsvOutcome::Timeout,
    }
}

fn nan_if_none(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

fn agent_index(res: &AsvResult, index: usize) -> Result<&sim::AgentResult, Failure> {
    res.result.agents.get(index).ok_or_else(|| {
        Failure(
            AsvStatus::OutOfRange,
            format!("agent index {index} out of range (count {})", res.result.agents.len()),
        )
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn asv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null if the last call
/// succeeded. Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn asv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses and validates a scenario from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asv_scenario_from_json(json: *const c_char, out: *mut *mut AsvScenario) -> AsvStatus {
    guard(|| {
        let out = unsafe { out_arg(out, "out") }?;
        *out = ptr::null_mut();
        let text = unsafe { str_arg(json, "json") }?;
        let scenario = Scenario::from_json_str(text)?;
        scenario.validate()?;
        *out = Box::into_raw(Box::new(AsvScenario {
            scenario,
            base_dir: None,
        }));
        Ok(())
    })
}

/// Loads and validates a scenario file. A relative ship coefficient file is
/// resolved against the scenario's directory.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asv_scenario_from_file(path: *const c_char, out: *mut *mut AsvScenario) -> AsvStatus {
    guard(|| {
        let out = unsafe { out_arg(out, "out") }?;
        *out = ptr::null_mut();
        let path = Path::new(unsafe { str_arg(path, "path") }?);
        let scenario = Scenario::from_path(path)?;
        scenario.validate()?;
        *out = Box::into_raw(Box::new(AsvScenario {
            scenario,
            base_dir: path.parent().map(Path::to_path_buf),
        }));
        Ok(())
    })
}

/// Overrides the method of every agent.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn asv_scenario_set_method(scenario: *mut AsvScenario, method: AsvMethod) -> AsvStatus {
    guard(|| {
        let sc = unsafe { out_arg(scenario, "scenario") }?;
        sc.scenario.method = method_from_c(method);
        for a in &mut sc.scenario.agents {
            a.method = None;
        }
        Ok(())
    })
}

/// Releases a scenario. Null is ignored.
///
/// # Safety
/// `scenario` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn asv_scenario_free(scenario: *mut AsvScenario) {
    if !scenario.is_null() {
        // SAFETY: handle came from Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// Runs a scenario to completion.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asv_simulate(scenario: *const AsvScenario, out: *mut *mut AsvResult) -> AsvStatus {
    guard(|| {
        let out = unsafe { out_arg(out, "out") }?;
        *out = ptr::null_mut();
        let sc = unsafe { ref_arg(scenario, "scenario") }?;
        let model = sc.scenario.ship_model(sc.base_dir.as_deref())?;
        let result = sim::run(&sc.scenario, Arc::new(model))?;
        *out = Box::into_raw(Box::new(AsvResult {
            name: sc.scenario.name.clone(),
            result,
        }));
        Ok(())
    })
}

/// Releases a result. Null is ignored.
///
/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn asv_result_free(result: *mut AsvResult) {
    if !result.is_null() {
        // SAFETY: handle came from Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Outcome of the own ship (the agent with the lowest id).
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asv_result_outcome(result: *const AsvResult, out: *mut AsvOutcome) -> AsvStatus {
    guard(|| {
        let out = unsafe { out_arg(out, "out") }?;
        let res = unsafe { ref_arg(result, "result") }?;
        *out = outcome_to_c(agent_index(res, 0)?.outcome);
        Ok(())
    })
}

/// Number of agents, ordered by id.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asv_result_agent_count(result: *const AsvResult, out: *mut usize) -> AsvStatus {
    guard(|| {
        let out = unsafe { out_arg(out, "out") }?;
        *out = unsafe { ref_arg(result, "result") }?.result.agents.len();
        Ok(())
    })
}

/// Summary of the agent at `index`.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asv_result_agent(
    result: *const AsvResult,
    index: usize,
    out: *mut AsvAgentSummary,
) -> AsvStatus {
    guard(|| {
        let out = unsafe { out_arg(out, "out") }?;
        let res = unsafe { ref_arg(result, "result") }?;
        let a = agent_index(res, index)?;
        *out = AsvAgentSummary {
            id: a.id,
            method: method_to_c(a.method),
            outcome: outcome_to_c(a.outcome),
            end_time: a.end_time,
            ce: a.metrics.ce,
            mcte: a.metrics.mcte,
            time_to_goal: nan_if_none(a.metrics.time_to_goal),
            min_separation: nan_if_none(a.metrics.min_separation),
            min_clearance: nan_if_none(a.metrics.min_clearance),
            max_vortex: a.metrics.max_vortex,
        };
        Ok(())
    })
}

/// Copies up to `capacity` samples of the agent at `index` into `buf` and
/// stores the total sample count in `total`. Pass a null `buf` with zero
/// capacity to query the count.
///
/// # Safety
/// `result` must be a live handle; `buf` must hold `capacity` elements;
/// `total` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asv_result_samples(
    result: *const AsvResult,
    index: usize,
    buf: *mut AsvSample,
    capacity: usize,
    total: *mut usize,
) -> AsvStatus {
    guard(|| {
        let total = unsafe { out_arg(total, "total") }?;
        let res = unsafe { ref_arg(result, "result") }?;
        let id = agent_index(res, index)?.id;
        let samples = res.result.trajectory(id).map_or(&[][..], |t| t.samples.as_slice());
        *total = samples.len();
        if capacity == 0 {
            return Ok(());
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        // SAFETY: caller guarantees `buf` holds `capacity` elements.
        let dst = unsafe { std::slice::from_raw_parts_mut(buf, capacity) };
        for (d, s) in dst.iter_mut().zip(samples) {
            *d = AsvSample {
                t: s.t,
                x: s.state.pose.x,
                y: s.state.pose.y,
                psi: s.state.pose.psi,
                u: s.state.nu.u,
                v: s.state.nu.v,
                r: s.state.nu.r,
                delta: s.state.delta,
                delta_c: s.delta_c,
                psi_d: s.psi_d,
                y_e: s.y_e,
                mode: match s.mode {
                    Mode::Ilos => 0,
                    Mode::Reactive => 1,
                },
            };
        }
        Ok(())
    })
}

/// Result document as JSON. Free with `asv_string_free`.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asv_result_to_json(result: *const AsvResult, out: *mut *mut c_char) -> AsvStatus {
    guard(|| {
        let out = unsafe { out_arg(out, "out") }?;
        *out = ptr::null_mut();
        let res = unsafe { ref_arg(result, "result") }?;
        let doc = ResultDocument::new(res.name.as_deref(), &res.result);
        *out = into_c_string(serde_json::to_string(&doc).map_err(Error::from)?)?;
        Ok(())
    })
}

/// Runs a Monte Carlo batch on benchmark environment `env` (1 to 5) and
/// returns the summary as JSON. `jobs` of 0 uses every core. Free with
/// `asv_string_free`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asv_batch_json(
    env: u8,
    method: AsvMethod,
    runs: usize,
    seed: u64,
    jobs: usize,
    out: *mut *mut c_char,
) -> AsvStatus {
    guard(|| {
        let out = unsafe { out_arg(out, "out") }?;
        *out = ptr::null_mut();
        let env = EnvSpec::table(env).map_err(|e| Failure(AsvStatus::OutOfRange, e.to_string()))?;
        let mut spec = BatchSpec::new(env, method_from_c(method), runs, seed);
        spec.jobs = jobs;
        let records = montecarlo::run_batch(&spec, Arc::new(ShipModel::kcs()))?;
        let summary = BatchSummary::new(&spec, records)?;
        *out = into_c_string(serde_json::to_string(&summary).map_err(Error::from)?)?;
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn asv_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: string came from CString::into_raw in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}
