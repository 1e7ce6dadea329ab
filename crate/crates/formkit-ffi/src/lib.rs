//! C ABI for the formkit verification toolkit.
//!
//! Matrices travel behind the opaque handle [`FkMatrix`]; every function
//! returns an [`FkStatus`] code and writes results through out-pointers. A
//! human-readable message for the most recent non-OK status on the current
//! thread is available from [`fk_last_error_message`]. The JSON entry point
//! [`fk_run_spec`] accepts the same problem-spec documents as the `formkit`
//! CLI and returns the report as a JSON string (free it with
//! [`fk_string_free`]).
//!
//! Handles returned through out-pointers are owned by the caller and must be
//! released with the matching `fk_*_free` function exactly once.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use num_complex::Complex64;

use formkit::commands::{self, CliOverrides, RunOptions};
use formkit::matrix::ComplexMatrix;
use formkit::spec_io::ProblemSpec;
use formkit::spectral::{self, ToleranceConfig};
use formkit::Error;

/// Status codes returned by every FFI entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FkStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Arguments failed validation (dimensions, tolerance ranges, UTF-8).
    InvalidArgument = 2,
    /// The spec or expression text could not be parsed.
    ParseError = 3,
    /// A numeric precondition failed (not Hermitian, not invertible, ...).
    NumericError = 4,
    /// A certification guard refused the computation (condition guard,
    /// singular metric).
    GuardError = 5,
}

/// Opaque dense complex matrix handle.
pub struct FkMatrix {
    inner: ComplexMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_from_error(e: &Error) -> FkStatus {
    let status = match e {
        Error::Parse(_) | Error::Eval(_) | Error::Spec(_) | Error::Json(_) | Error::Io { .. } => {
            FkStatus::ParseError
        }
        Error::InvalidTolerance(_) | Error::DimensionMismatch { .. } => FkStatus::InvalidArgument,
        Error::ConditionGuard { .. } | Error::MetricSingular { .. } => FkStatus::GuardError,
        _ => FkStatus::NumericError,
    };
    set_last_error(e.to_string());
    status
}

fn tolerance(rel_tol: f64, rank_cutoff: f64) -> Result<ToleranceConfig, FkStatus> {
    let mut tol = ToleranceConfig::default();
    if rel_tol > 0.0 {
        tol.rel_tol = rel_tol;
    }
    if rank_cutoff > 0.0 {
        tol.rank_cutoff = rank_cutoff;
    }
    tol.validate().map_err(|e| status_from_error(&e))?;
    Ok(tol)
}

/// Message describing the most recent non-OK status on this thread, or null
/// when no error has occurred. The pointer stays valid until the next FFI
/// call on the same thread.
#[no_mangle]
pub extern "C" fn fk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |c| c.as_ptr())
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn fk_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Builds a matrix from row-major interleaved `[re, im]` doubles
/// (`2 * rows * cols` values).
///
/// # Safety
/// `data` must point to at least `2 * rows * cols` readable doubles and
/// `out` must be a valid location to store the handle.
#[no_mangle]
pub unsafe extern "C" fn fk_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut FkMatrix,
) -> FkStatus {
    if data.is_null() || out.is_null() {
        return FkStatus::NullPointer;
    }
    if rows == 0 || cols == 0 {
        set_last_error("matrix dimensions must be positive".to_string());
        return FkStatus::InvalidArgument;
    }
    let len = rows * cols;
    let raw = std::slice::from_raw_parts(data, 2 * len);
    let entries: Vec<Complex64> = raw
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    match ComplexMatrix::new(rows, cols, entries) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(FkMatrix { inner: m }));
            FkStatus::Ok
        }
        Err(e) => status_from_error(&e),
    }
}

/// Releases a matrix handle.
///
/// # Safety
/// `m` must be a handle returned by this library, not yet freed; null is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn fk_matrix_free(m: *mut FkMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn fk_matrix_rows(m: *const FkMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.rows())
}

/// # Safety
/// `m` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn fk_matrix_cols(m: *const FkMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.cols())
}

/// Reads entry `(i, j)` into `re`/`im`.
///
/// # Safety
/// `m` must be a valid handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fk_matrix_get(
    m: *const FkMatrix,
    i: usize,
    j: usize,
    re: *mut f64,
    im: *mut f64,
) -> FkStatus {
    let Some(m) = m.as_ref() else {
        return FkStatus::NullPointer;
    };
    if re.is_null() || im.is_null() {
        return FkStatus::NullPointer;
    }
    if i >= m.inner.rows() || j >= m.inner.cols() {
        set_last_error(format!(
            "index ({i}, {j}) out of range for {}x{} matrix",
            m.inner.rows(),
            m.inner.cols()
        ));
        return FkStatus::InvalidArgument;
    }
    let e = m.inner[(i, j)];
    *re = e.re;
    *im = e.im;
    FkStatus::Ok
}

/// Largest singular value.
///
/// # Safety
/// `m` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fk_operator_norm(m: *const FkMatrix, out: *mut f64) -> FkStatus {
    let Some(m) = m.as_ref() else {
        return FkStatus::NullPointer;
    };
    if out.is_null() {
        return FkStatus::NullPointer;
    }
    match spectral::operator_norm(&m.inner) {
        Ok(v) => {
            *out = v;
            FkStatus::Ok
        }
        Err(e) => status_from_error(&e),
    }
}

/// Polar decomposition `T = U |T|`. Pass non-positive tolerances to use the
/// defaults (`rel_tol = 1e-10`, `rank_cutoff = 1e-12`).
///
/// # Safety
/// `t` must be a valid handle; the out-pointers must be writable. On success
/// the caller owns both returned handles.
#[no_mangle]
pub unsafe extern "C" fn fk_polar(
    t: *const FkMatrix,
    rel_tol: f64,
    rank_cutoff: f64,
    isometry_out: *mut *mut FkMatrix,
    modulus_out: *mut *mut FkMatrix,
    rank_out: *mut usize,
) -> FkStatus {
    let Some(t) = t.as_ref() else {
        return FkStatus::NullPointer;
    };
    if isometry_out.is_null() || modulus_out.is_null() || rank_out.is_null() {
        return FkStatus::NullPointer;
    }
    let tol = match tolerance(rel_tol, rank_cutoff) {
        Ok(tol) => tol,
        Err(status) => return status,
    };
    match spectral::polar(&t.inner, &tol) {
        Ok(parts) => {
            *isometry_out = Box::into_raw(Box::new(FkMatrix {
                inner: parts.isometry,
            }));
            *modulus_out = Box::into_raw(Box::new(FkMatrix {
                inner: parts.modulus,
            }));
            *rank_out = parts.rank;
            FkStatus::Ok
        }
        Err(e) => status_from_error(&e),
    }
}

/// `|T|^(1/2)` of a square matrix.
///
/// # Safety
/// `t` must be a valid handle; `out` must be writable; the caller owns the
/// returned handle.
#[no_mangle]
pub unsafe extern "C" fn fk_modulus_half(
    t: *const FkMatrix,
    rel_tol: f64,
    rank_cutoff: f64,
    out: *mut *mut FkMatrix,
) -> FkStatus {
    let Some(t) = t.as_ref() else {
        return FkStatus::NullPointer;
    };
    if out.is_null() {
        return FkStatus::NullPointer;
    }
    let tol = match tolerance(rel_tol, rank_cutoff) {
        Ok(tol) => tol,
        Err(status) => return status,
    };
    match spectral::modulus_half(&t.inner, &tol) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(FkMatrix { inner: m }));
            FkStatus::Ok
        }
        Err(e) => status_from_error(&e),
    }
}

/// Residual of the intertwining identity `|T*|^(1/2) U = U |T|^(1/2)`.
///
/// # Safety
/// `t` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fk_intertwine_residual(
    t: *const FkMatrix,
    rel_tol: f64,
    rank_cutoff: f64,
    out: *mut f64,
) -> FkStatus {
    let Some(t) = t.as_ref() else {
        return FkStatus::NullPointer;
    };
    if out.is_null() {
        return FkStatus::NullPointer;
    }
    let tol = match tolerance(rel_tol, rank_cutoff) {
        Ok(tol) => tol,
        Err(status) => return status,
    };
    match spectral::intertwine_check(&t.inner, &tol) {
        Ok(v) => {
            *out = v;
            FkStatus::Ok
        }
        Err(e) => status_from_error(&e),
    }
}

/// Recovers the gram matrix of the unique form with associated operator `T`,
/// using a perturbation `B` with `T + B` invertible.
///
/// # Safety
/// `t` and `b` must be valid handles; `out` must be writable; the caller
/// owns the returned handle.
#[no_mangle]
pub unsafe extern "C" fn fk_form_from_operator(
    t: *const FkMatrix,
    b: *const FkMatrix,
    rel_tol: f64,
    rank_cutoff: f64,
    out: *mut *mut FkMatrix,
) -> FkStatus {
    let (Some(t), Some(b)) = (t.as_ref(), b.as_ref()) else {
        return FkStatus::NullPointer;
    };
    if out.is_null() {
        return FkStatus::NullPointer;
    }
    let tol = match tolerance(rel_tol, rank_cutoff) {
        Ok(tol) => tol,
        Err(status) => return status,
    };
    match formkit::forms::form_from_operator(&t.inner, &b.inner, &tol) {
        Ok(form) => {
            *out = Box::into_raw(Box::new(FkMatrix {
                inner: form.gram().clone(),
            }));
            FkStatus::Ok
        }
        Err(e) => status_from_error(&e),
    }
}

/// Runs a verification command (`polar`, `analyze`, `second-rep`,
/// `from-operator`, or `diagonal`) on a JSON problem spec and returns the
/// JSON report. `samples == 0` uses the default sample count. Reports never
/// carry timestamps, so identical inputs give byte-identical output.
///
/// # Safety
/// `command` and `spec_json` must be valid NUL-terminated strings;
/// `report_out` must be writable. Free the returned string with
/// [`fk_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fk_run_spec(
    command: *const c_char,
    spec_json: *const c_char,
    seed: u64,
    samples: usize,
    report_out: *mut *mut c_char,
) -> FkStatus {
    if command.is_null() || spec_json.is_null() || report_out.is_null() {
        return FkStatus::NullPointer;
    }
    let Ok(command) = CStr::from_ptr(command).to_str() else {
        set_last_error("command is not valid UTF-8".to_string());
        return FkStatus::InvalidArgument;
    };
    let Ok(spec_text) = CStr::from_ptr(spec_json).to_str() else {
        set_last_error("spec is not valid UTF-8".to_string());
        return FkStatus::InvalidArgument;
    };

    let run = || -> formkit::Result<String> {
        let spec = ProblemSpec::parse(spec_text)?;
        let opts = RunOptions::resolve(
            &spec,
            &CliOverrides {
                seed: Some(seed),
                samples: (samples > 0).then_some(samples),
                timestamp: false,
                ..CliOverrides::default()
            },
        )?;
        Ok(commands::run_command(command, &spec, &opts)?.to_json())
    };
    match run() {
        Ok(json) => match CString::new(json) {
            Ok(c) => {
                *report_out = c.into_raw();
                FkStatus::Ok
            }
            Err(_) => {
                set_last_error("report contained an interior NUL".to_string());
                FkStatus::InvalidArgument
            }
        },
        Err(e) => status_from_error(&e),
    }
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must have been returned by [`fk_run_spec`], not yet freed; null is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn fk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
