//! C ABI for the confluence simulator.
//!
//! Configs and runs are opaque handles created and freed through this
//! interface. Every fallible call returns a [`CflStatus`]; on failure the
//! message is available from [`cfl_last_error_message`] on the same
//! thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use confluence::config::VALID_KEYS;
use confluence::output::write_run_outputs;
use confluence::{run_simulation, Error, RunConfig, RunRecord, RunSummary};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CflStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    UnknownKey = 3,
    InvalidConfig = 4,
    NumericalFailure = 5,
    Io = 6,
    /// The requested quantity does not exist for this run (no dip, no
    /// confluence, index out of range).
    NotAvailable = 7,
    Panic = 8,
}

/// Opaque config handle: an optional config file plus `key=value`
/// overrides, resolved when a run is started.
pub struct CflConfig {
    file: Option<PathBuf>,
    overrides: Vec<String>,
}

/// Opaque handle to a finished run.
pub struct CflRun {
    record: RunRecord,
    summary: RunSummary,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CflDipReport {
    pub r_min: f64,
    pub t_min: f64,
    pub sigma_min: f64,
    pub amplitude: f64,
    pub onset_time: f64,
    /// NaN when the half-amplitude width could not be measured.
    pub width: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: CflStatus, msg: impl Into<String>) -> CflStatus {
    set_error(msg);
    status
}

fn status_of(err: &Error) -> CflStatus {
    match err {
        Error::UnknownKey { .. } => CflStatus::UnknownKey,
        Error::InvalidConfig(_) | Error::InvalidMesh(_) | Error::Parse(_) => CflStatus::InvalidConfig,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => CflStatus::Io,
        _ => CflStatus::NumericalFailure,
    }
}

fn from_error(err: Error) -> CflStatus {
    let s = status_of(&err);
    fail(s, err.to_string())
}

fn guard(f: impl FnOnce() -> CflStatus) -> CflStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(CflStatus::Panic, "internal panic"))
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, CflStatus> {
    if p.is_null() {
        return Err(fail(CflStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CflStatus::InvalidUtf8, "string argument is not UTF-8"))
}

/// Message of the last failing call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cfl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// New config holding the defaults.
#[no_mangle]
pub extern "C" fn cfl_config_new() -> *mut CflConfig {
    Box::into_raw(Box::new(CflConfig {
        file: None,
        overrides: Vec::new(),
    }))
}

/// # Safety
/// `cfg` must be NULL or a handle from `cfl_config_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cfl_config_free(cfg: *mut CflConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Reads base values from a TOML config or a `run_meta.json`.
///
/// # Safety
/// `cfg` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cfl_config_load_file(cfg: *mut CflConfig, path: *const c_char) -> CflStatus {
    guard(|| {
        let Some(cfg) = cfg.as_mut() else {
            return fail(CflStatus::NullPointer, "null config handle");
        };
        let path = match str_arg(path) {
            Ok(p) => PathBuf::from(p),
            Err(s) => return s,
        };
        if let Err(e) = RunConfig::load(Some(&path), &[]) {
            return from_error(e);
        }
        cfg.file = Some(path);
        CflStatus::Ok
    })
}

/// Sets one key. `value` uses config file syntax (`0.01`, `"neumann"`,
/// `[1.2, 1.4]`); bare words are taken as strings. Cross-field checks
/// run when the config is validated or a run starts.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn cfl_config_set(cfg: *mut CflConfig, key: *const c_char, value: *const c_char) -> CflStatus {
    guard(|| {
        let Some(cfg) = cfg.as_mut() else {
            return fail(CflStatus::NullPointer, "null config handle");
        };
        let (key, value) = match (str_arg(key), str_arg(value)) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        if !VALID_KEYS.contains(&key) {
            return from_error(Error::UnknownKey {
                key: key.to_string(),
                valid: VALID_KEYS.join(", "),
            });
        }
        cfg.overrides.push(format!("{key}={value}"));
        CflStatus::Ok
    })
}

/// Resolves and validates the config without running it.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cfl_config_validate(cfg: *const CflConfig) -> CflStatus {
    guard(|| match resolve(cfg) {
        Ok(_) => CflStatus::Ok,
        Err(s) => s,
    })
}

unsafe fn resolve(cfg: *const CflConfig) -> Result<RunConfig, CflStatus> {
    let cfg = cfg
        .as_ref()
        .ok_or_else(|| fail(CflStatus::NullPointer, "null config handle"))?;
    RunConfig::load(cfg.file.as_deref(), &cfg.overrides).map_err(from_error)
}

/// Runs the simulation to completion or divergence. A diverged run is
/// still returned with `CFL_STATUS_OK`; query it with `cfl_run_diverged`.
///
/// # Safety
/// `cfg` must be a live config handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cfl_run_new(cfg: *const CflConfig, out: *mut *mut CflRun) -> CflStatus {
    guard(|| {
        if out.is_null() {
            return fail(CflStatus::NullPointer, "null output pointer");
        }
        *out = std::ptr::null_mut();
        let cfg = match resolve(cfg) {
            Ok(c) => c,
            Err(s) => return s,
        };
        match run_simulation(&cfg) {
            Ok(record) => {
                let summary = record.summarize();
                *out = Box::into_raw(Box::new(CflRun { record, summary }));
                CflStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `run` must be NULL or a handle from `cfl_run_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cfl_run_free(run: *mut CflRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// 1 if the run stopped early, 0 if it completed, -1 for a NULL handle.
///
/// # Safety
/// `run` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cfl_run_diverged(run: *const CflRun) -> i32 {
    run.as_ref().map_or(-1, |r| i32::from(r.summary.diverged()))
}

/// Number of recorded time levels, including t = 0. Zero for NULL.
///
/// # Safety
/// `run` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cfl_run_n_levels(run: *const CflRun) -> usize {
    run.as_ref().map_or(0, |r| r.record.times.len())
}

/// Steps on which the order function system was not diagonally dominant.
///
/// # Safety
/// `run` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cfl_run_dominance_lost_steps(run: *const CflRun) -> usize {
    run.as_ref().map_or(0, |r| r.summary.dominance_lost_steps)
}

/// # Safety
/// `run` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cfl_run_dip(run: *const CflRun, out: *mut CflDipReport) -> CflStatus {
    let (Some(run), Some(out)) = (run.as_ref(), out.as_mut()) else {
        return fail(CflStatus::NullPointer, "null argument");
    };
    match run.summary.dip {
        Some(d) => {
            *out = CflDipReport {
                r_min: d.r_min,
                t_min: d.t_min,
                sigma_min: d.sigma_min,
                amplitude: d.amplitude,
                onset_time: d.onset_time,
                width: d.width.unwrap_or(f64::NAN),
            };
            CflStatus::Ok
        }
        None => fail(CflStatus::NotAvailable, "no dip in the search window"),
    }
}

/// # Safety
/// `run` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cfl_run_confluence_time(run: *const CflRun, out: *mut f64) -> CflStatus {
    let (Some(run), Some(out)) = (run.as_ref(), out.as_mut()) else {
        return fail(CflStatus::NullPointer, "null argument");
    };
    match run.summary.track.confluence_time {
        Some(t) => {
            *out = t;
            CflStatus::Ok
        }
        None => fail(CflStatus::NotAvailable, "the boundaries did not meet"),
    }
}

/// Boundary positions at level `index`; a boundary that no longer
/// exists is reported as NaN.
///
/// # Safety
/// `run` must be a live handle; `t`, `r1`, `r2` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cfl_run_boundary_track(
    run: *const CflRun,
    index: usize,
    t: *mut f64,
    r1: *mut f64,
    r2: *mut f64,
) -> CflStatus {
    let (Some(run), Some(t), Some(r1), Some(r2)) = (run.as_ref(), t.as_mut(), r1.as_mut(), r2.as_mut()) else {
        return fail(CflStatus::NullPointer, "null argument");
    };
    let track = &run.summary.track;
    if index >= track.times.len() {
        return fail(
            CflStatus::NotAvailable,
            format!("level {index} out of range ({} levels)", track.times.len()),
        );
    }
    *t = track.times[index];
    *r1 = track.r1[index].unwrap_or(f64::NAN);
    *r2 = track.r2[index].unwrap_or(f64::NAN);
    CflStatus::Ok
}

/// Writes the CSV and JSON outputs of the run into `dir`.
///
/// # Safety
/// `run` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cfl_run_write_outputs(run: *const CflRun, dir: *const c_char) -> CflStatus {
    guard(|| {
        let Some(run) = run.as_ref() else {
            return fail(CflStatus::NullPointer, "null run handle");
        };
        let dir = match str_arg(dir) {
            Ok(d) => PathBuf::from(d),
            Err(s) => return s,
        };
        match write_run_outputs(&dir, &run.record, &run.summary) {
            Ok(_) => CflStatus::Ok,
            Err(e) => from_error(e),
        }
    })
}

/// Closed-form temperature jump `−(r1 v1 − r2 v2)/2` at confluence.
#[no_mangle]
pub extern "C" fn cfl_analytic_jump(r1: f64, v1: f64, r2: f64, v2: f64) -> f64 {
    confluence::analytic_jump(r1, v1, r2, v2)
}
