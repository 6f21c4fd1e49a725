//! C ABI for the solver: opaque handles, integer status codes, and a few
//! pure helpers that bind easily from other languages.

use kinrelax::cli::{self, RunConfig};
use kinrelax::stability::{self, SchemePairing};
use kinrelax::Error;
use libc::c_char;
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrStatus {
    Ok = 0,
    NumericalFailure = 1,
    ConfigError = 2,
    NullArgument = 3,
    Panic = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', "?")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> KrStatus {
    match err.exit_code() {
        2 => KrStatus::ConfigError,
        _ => KrStatus::NumericalFailure,
    }
}

/// Message of the last error on this thread; borrowed until the next
/// failing call. NULL when no error has been recorded.
#[no_mangle]
pub extern "C" fn kr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map(|c| c.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Opaque parsed run configuration.
pub struct KrConfig {
    inner: RunConfig,
}

/// Opaque run report: the stdout lines and artifact paths of a finished run.
pub struct KrReport {
    lines: Vec<CString>,
    artifacts: Vec<CString>,
}

/// Parse a `key = value` configuration text into a new handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kr_config_parse(text: *const c_char, out: *mut *mut KrConfig) -> KrStatus {
    if text.is_null() || out.is_null() {
        return KrStatus::NullArgument;
    }
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        set_error("config text is not valid UTF-8");
        return KrStatus::ConfigError;
    };
    match cli::parse_config(text) {
        Ok(cfg) => {
            *out = Box::into_raw(Box::new(KrConfig { inner: cfg }));
            KrStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// # Safety
/// `cfg` must be a handle from [`kr_config_parse`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kr_config_free(cfg: *mut KrConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Execute a configured run; on success stores a new report handle.
///
/// # Safety
/// `cfg` must be a live handle from [`kr_config_parse`]; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kr_run(cfg: *const KrConfig, out: *mut *mut KrReport) -> KrStatus {
    if cfg.is_null() || out.is_null() {
        return KrStatus::NullArgument;
    }
    let cfg = &(*cfg).inner;
    let result = catch_unwind(AssertUnwindSafe(|| cli::execute(cfg)));
    match result {
        Ok(Ok(summary)) => {
            let lines = summary
                .lines
                .iter()
                .map(|l| CString::new(l.as_str()).unwrap_or_default())
                .collect();
            let artifacts = summary
                .artifacts
                .iter()
                .map(|p| CString::new(p.display().to_string()).unwrap_or_default())
                .collect();
            *out = Box::into_raw(Box::new(KrReport { lines, artifacts }));
            KrStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic inside kr_run");
            KrStatus::Panic
        }
    }
}

/// # Safety
/// `rep` must be a handle from [`kr_run`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kr_report_free(rep: *mut KrReport) {
    if !rep.is_null() {
        drop(Box::from_raw(rep));
    }
}

/// Number of summary lines in a report.
///
/// # Safety
/// `rep` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn kr_report_line_count(rep: *const KrReport) -> usize {
    if rep.is_null() {
        return 0;
    }
    (*rep).lines.len()
}

/// Borrowed pointer to summary line `i` (NULL out of range); valid while
/// the report lives.
///
/// # Safety
/// `rep` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn kr_report_line(rep: *const KrReport, i: usize) -> *const c_char {
    if rep.is_null() {
        return std::ptr::null();
    }
    (&(*rep).lines)
        .get(i)
        .map(|c| c.as_ptr())
        .unwrap_or(std::ptr::null())
}

/// Number of artifact paths in a report.
///
/// # Safety
/// `rep` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn kr_report_artifact_count(rep: *const KrReport) -> usize {
    if rep.is_null() {
        return 0;
    }
    (*rep).artifacts.len()
}

/// Borrowed pointer to artifact path `i` (NULL out of range).
///
/// # Safety
/// `rep` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn kr_report_artifact(rep: *const KrReport, i: usize) -> *const c_char {
    if rep.is_null() {
        return std::ptr::null();
    }
    (&(*rep).artifacts)
        .get(i)
        .map(|c| c.as_ptr())
        .unwrap_or(std::ptr::null())
}

/// Critical CFL number of a (time order, flux order, iterations) pairing;
/// NaN for an unsupported pairing.
#[no_mangle]
pub extern "C" fn kr_critical_cfl(time_order: u32, spatial_order: u32, iterations: u32) -> f64 {
    if !matches!(time_order, 1 | 2 | 4) || !matches!(spatial_order, 1 | 2 | 4) || iterations == 0 {
        return f64::NAN;
    }
    let pairing = SchemePairing {
        time_order: time_order as u8,
        spatial: spatial_order as u8,
        iterations: iterations as usize,
    };
    stability::critical_cfl(&pairing, 4096, 1e-3).unwrap_or(f64::NAN)
}

/// The full critical-CFL table as a CSV string; free with
/// [`kr_string_free`]. NULL on failure.
#[no_mangle]
pub extern "C" fn kr_stability_table_csv() -> *mut c_char {
    match stability::compute_table(4096, 1e-3) {
        Ok(rows) => CString::new(stability::table_csv(&rows))
            .map(CString::into_raw)
            .unwrap_or(std::ptr::null_mut()),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `s` must come from a kinrelax function that allocates a string, and must
/// not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn kr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
