//! C ABI for the lower-envelope estimation library.
//!
//! Conventions:
//! - results are returned through opaque handles that must be released with
//!   the matching `_free` function;
//! - every fallible call returns a [`LowenvStatus`]; on failure the message
//!   is retrievable with [`lowenv_last_error`] (thread-local);
//! - strings handed out by the library must be released with
//!   [`lowenv_string_free`];
//! - panics never cross the boundary, they are reported as
//!   `LOWENV_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use lowenv::cli::{parse_config_str, EstimateConfig};
use lowenv::estimator::{lower_envelope_estimate, EnvelopeEstimate};
use lowenv::Error;

/// Status codes returned by every fallible entry point.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowenvStatus {
    /// Success.
    Ok = 0,
    /// The computation failed; see `lowenv_last_error`.
    Computation = 1,
    /// The configuration or an argument was invalid.
    Config = 2,
    /// A required pointer was null or a string was not valid UTF-8.
    NullArgument = 3,
    /// An internal panic was caught at the boundary.
    Panic = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_for(err: &Error) -> LowenvStatus {
    match err {
        Error::Config(_) | Error::InvalidSpec(_) | Error::Io(_) => LowenvStatus::Config,
        _ => LowenvStatus::Computation,
    }
}

/// An estimation result. Opaque; query through the accessor functions and
/// release with `lowenv_result_free`.
pub struct LowenvResult {
    estimate: EnvelopeEstimate,
}

/// The last error message raised on this thread. The pointer stays valid
/// until the next failing library call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn lowenv_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// The library version as a static string; do not free it.
#[no_mangle]
pub extern "C" fn lowenv_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Runs a lower-envelope estimate from a JSON configuration with the same
/// schema as the `estimate` CLI subcommand. On success `*out` owns a result
/// handle.
///
/// # Safety
/// `config_json` must be a valid NUL-terminated string and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn lowenv_estimate_json(
    config_json: *const c_char,
    out: *mut *mut LowenvResult,
) -> LowenvStatus {
    if config_json.is_null() || out.is_null() {
        set_last_error("null argument");
        return LowenvStatus::NullArgument;
    }
    let text = match CStr::from_ptr(config_json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_last_error("config is not valid UTF-8");
            return LowenvStatus::NullArgument;
        }
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| run_estimate(text)));
    match outcome {
        Ok(Ok(estimate)) => {
            *out = Box::into_raw(Box::new(LowenvResult { estimate }));
            LowenvStatus::Ok
        }
        Ok(Err(err)) => {
            set_last_error(&err.to_string());
            status_for(&err)
        }
        Err(_) => {
            set_last_error("internal panic");
            LowenvStatus::Panic
        }
    }
}

fn run_estimate(text: &str) -> Result<EnvelopeEstimate, Error> {
    let cfg: EstimateConfig = parse_config_str(text)?;
    cfg.central.validate()?;
    cfg.solver.validate()?;
    let family = cfg.family.build()?;
    let f = cfg.f.build()?;
    lower_envelope_estimate(
        &*f,
        &family,
        &cfg.central,
        cfg.backend,
        cfg.n,
        cfg.seed,
        &cfg.solver,
    )
}

/// The estimated lower-envelope value.
///
/// # Safety
/// `result` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn lowenv_result_value(result: *const LowenvResult) -> f64 {
    if result.is_null() {
        return f64::NAN;
    }
    (*result).estimate.value
}

/// Dimension of the minimizing parameter.
///
/// # Safety
/// `result` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn lowenv_result_argmin_len(result: *const LowenvResult) -> usize {
    if result.is_null() {
        return 0;
    }
    (*result).estimate.argmin_t.len()
}

/// Component `index` of the minimizing parameter; NaN when out of range.
///
/// # Safety
/// `result` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn lowenv_result_argmin(
    result: *const LowenvResult,
    index: usize,
) -> f64 {
    if result.is_null() {
        return f64::NAN;
    }
    let result = &*result;
    result.estimate.argmin_t.get(index).copied().unwrap_or(f64::NAN)
}

/// Number of samples that violated the support-superset assumption.
///
/// # Safety
/// `result` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn lowenv_result_support_violations(
    result: *const LowenvResult,
) -> usize {
    if result.is_null() {
        return 0;
    }
    (*result).estimate.support_violations
}

/// Serializes the full result (including the solver trace) as JSON. The
/// returned string must be released with `lowenv_string_free`.
///
/// # Safety
/// `result` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn lowenv_result_to_json(result: *const LowenvResult) -> *mut c_char {
    if result.is_null() {
        return std::ptr::null_mut();
    }
    match serde_json::to_string(&(*result).estimate) {
        Ok(json) => CString::new(json)
            .map(CString::into_raw)
            .unwrap_or(std::ptr::null_mut()),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Releases a result handle. Passing null is a no-op.
///
/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lowenv_result_free(result: *mut LowenvResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Releases a string returned by this library. Passing null is a no-op.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lowenv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
