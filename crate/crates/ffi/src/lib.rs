//! C interface to `uwbsync`.
//!
//! Scenarios and metric tables are opaque heap handles owned by the caller
//! and released with their `_free` function. Every fallible call returns a
//! [`UwbStatus`]; on failure [`uwb_last_error_message`] describes the error
//! on the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use uwbsync::harness::{self, Estimator, MetricsTable, ScenarioConfig};
use uwbsync::scenario::{self, ConfigError};
use uwbsync::sync::Mode;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UwbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Runtime = 4,
    Io = 5,
    OutOfRange = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UwbMode {
    Nda = 0,
    Da = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UwbEstimator {
    CoarseOnly = 0,
    TwoStage = 1,
}

impl From<Mode> for UwbMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Nda => UwbMode::Nda,
            Mode::Da => UwbMode::Da,
        }
    }
}

impl From<UwbMode> for Mode {
    fn from(m: UwbMode) -> Self {
        match m {
            UwbMode::Nda => Mode::Nda,
            UwbMode::Da => Mode::Da,
        }
    }
}

impl From<Estimator> for UwbEstimator {
    fn from(e: Estimator) -> Self {
        match e {
            Estimator::CoarseOnly => UwbEstimator::CoarseOnly,
            Estimator::TwoStage => UwbEstimator::TwoStage,
        }
    }
}

/// One aggregated sweep point. `snr_db` is `INFINITY` for noiseless rows.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UwbMetricsRow {
    pub snr_db: f64,
    pub m: u32,
    pub mode: UwbMode,
    pub estimator: UwbEstimator,
    pub n_users: u32,
    pub normalized_mse: f64,
    pub p_acq: f64,
    pub trials: u64,
    pub ci_halfwidth: f64,
}

/// Offsets and circular errors in ns.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UwbTrialResult {
    pub true_tau: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub err_coarse: f64,
    pub err_fine: f64,
    pub seed: u64,
}

/// Opaque scenario handle.
pub struct UwbScenario(ScenarioConfig);

/// Opaque metrics table handle.
pub struct UwbMetrics(MetricsTable);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(UwbStatus, String);

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure(UwbStatus::Config, e.to_string())
    }
}

impl From<uwbsync::Error> for Failure {
    fn from(e: uwbsync::Error) -> Self {
        Failure(UwbStatus::Runtime, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(UwbStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, mapping failures and panics to a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> UwbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            UwbStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            UwbStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(UwbStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn scenario_mut<'a>(p: *mut UwbScenario) -> Result<&'a mut ScenarioConfig, Failure> {
    p.as_mut().map(|s| &mut s.0).ok_or_else(|| null("scenario"))
}

unsafe fn scenario_ref<'a>(p: *const UwbScenario) -> Result<&'a ScenarioConfig, Failure> {
    p.as_ref().map(|s| &s.0).ok_or_else(|| null("scenario"))
}

unsafe fn metrics_ref<'a>(p: *const UwbMetrics) -> Result<&'a MetricsTable, Failure> {
    p.as_ref().map(|m| &m.0).ok_or_else(|| null("metrics"))
}

fn boxed_scenario(out: &mut *mut UwbScenario, cfg: ScenarioConfig) {
    *out = Box::into_raw(Box::new(UwbScenario(cfg)));
}

/// Parses a scenario file into a new handle stored in `*out`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uwb_scenario_from_file(path: *const c_char, out: *mut *mut UwbScenario) -> UwbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let cfg = scenario::parse_scenario(Path::new(str_arg(path, "path")?))?;
        boxed_scenario(out, cfg);
        Ok(())
    })
}

/// Parses scenario text into a new handle stored in `*out`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uwb_scenario_from_str(text: *const c_char, out: *mut *mut UwbScenario) -> UwbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let cfg = scenario::parse_scenario_str(str_arg(text, "text")?)?;
        boxed_scenario(out, cfg);
        Ok(())
    })
}

/// Loads a bundled scenario: `"paper_cm1"` or `"desk"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uwb_scenario_bundled(name: *const c_char, out: *mut *mut UwbScenario) -> UwbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let text = match str_arg(name, "name")? {
            "paper_cm1" => scenario::PAPER_CM1,
            "desk" => scenario::DESK,
            other => return Err(Failure(UwbStatus::Config, format!("no bundled scenario `{other}`"))),
        };
        boxed_scenario(out, scenario::parse_scenario_str(text)?);
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uwb_scenario_free(scenario: *mut UwbScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uwb_scenario_set_seed(scenario: *mut UwbScenario, seed: u64) -> UwbStatus {
    guard(|| {
        scenario_mut(scenario)?.master_seed = seed;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uwb_scenario_set_trials(scenario: *mut UwbScenario, trials: usize) -> UwbStatus {
    guard(|| {
        if trials == 0 {
            return Err(Failure(UwbStatus::Config, "trials must be at least 1".into()));
        }
        scenario_mut(scenario)?.trials = trials;
        Ok(())
    })
}

/// Replaces the SNR points; `INFINITY` selects a noiseless point.
///
/// # Safety
/// `scenario` must be a live handle and `snr_db` point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn uwb_scenario_set_snr_points(
    scenario: *mut UwbScenario,
    snr_db: *const f64,
    len: usize,
) -> UwbStatus {
    guard(|| {
        let cfg = scenario_mut(scenario)?;
        if snr_db.is_null() {
            return Err(null("snr_db"));
        }
        let points = std::slice::from_raw_parts(snr_db, len).to_vec();
        if points.is_empty() || points.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return Err(Failure(UwbStatus::Config, "snr points must be nonempty and finite or INFINITY".into()));
        }
        cfg.snr_points_db = points;
        Ok(())
    })
}

/// Writes the canonical scenario text to `*out`; free it with [`uwb_string_free`].
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uwb_scenario_emit(scenario: *const UwbScenario, out: *mut *mut c_char) -> UwbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let text = scenario::emit_config(scenario_ref(scenario)?);
        *out = CString::new(text).expect("scenario text has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uwb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs the full sweep. `workers = 0` uses the default thread pool; the
/// result does not depend on the worker count.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uwb_sweep(
    scenario: *const UwbScenario,
    workers: usize,
    out: *mut *mut UwbMetrics,
) -> UwbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let cfg = scenario_ref(scenario)?;
        let table = match workers {
            0 => harness::sweep(cfg)?,
            w => harness::sweep_with_workers(cfg, w)?,
        };
        *out = Box::into_raw(Box::new(UwbMetrics(table)));
        Ok(())
    })
}

/// Runs a single seeded trial at one `(M, mode, SNR)` point.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uwb_run_trial(
    scenario: *const UwbScenario,
    m: u32,
    mode: UwbMode,
    snr_db: f64,
    trial_index: u64,
    out: *mut UwbTrialResult,
) -> UwbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = scenario_ref(scenario)?;
        let sync_cfg = cfg.sync_config(m as usize, mode.into());
        sync_cfg.validate(&cfg.geometry)?;
        let r = harness::run_trial(cfg, &sync_cfg, snr_db, trial_index)?;
        *out = UwbTrialResult {
            true_tau: r.true_tau,
            tau1: r.tau1,
            tau2: r.tau2,
            err_coarse: r.err_coarse,
            err_fine: r.err_fine,
            seed: r.seed,
        };
        Ok(())
    })
}

/// Number of rows; 0 for a null handle.
///
/// # Safety
/// `metrics` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn uwb_metrics_len(metrics: *const UwbMetrics) -> usize {
    metrics.as_ref().map_or(0, |m| m.0.rows.len())
}

/// # Safety
/// `metrics` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uwb_metrics_row(
    metrics: *const UwbMetrics,
    index: usize,
    out: *mut UwbMetricsRow,
) -> UwbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let rows = &metrics_ref(metrics)?.rows;
        let r =
            rows.get(index).ok_or_else(|| Failure(UwbStatus::OutOfRange, format!("row {index} of {}", rows.len())))?;
        *out = UwbMetricsRow {
            snr_db: r.snr_db,
            m: r.m as u32,
            mode: r.mode.into(),
            estimator: r.estimator.into(),
            n_users: r.n_users as u32,
            normalized_mse: r.normalized_mse,
            p_acq: r.p_acq,
            trials: r.trials as u64,
            ci_halfwidth: r.ci_halfwidth,
        };
        Ok(())
    })
}

/// Writes the table as `metrics.csv`-format text to `path`.
///
/// # Safety
/// `metrics` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn uwb_metrics_write_csv(metrics: *const UwbMetrics, path: *const c_char) -> UwbStatus {
    guard(|| {
        let table = metrics_ref(metrics)?;
        let path = str_arg(path, "path")?;
        std::fs::write(path, table.to_csv()).map_err(|e| Failure(UwbStatus::Io, format!("{path}: {e}")))
    })
}

/// # Safety
/// `metrics` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uwb_metrics_free(metrics: *mut UwbMetrics) {
    if !metrics.is_null() {
        drop(Box::from_raw(metrics));
    }
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn uwb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uwb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
