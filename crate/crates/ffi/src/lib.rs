//! C ABI over the `frobjet` engine.
//!
//! Manifolds are opaque handles built from JSON configuration text. Every
//! command returns a status code and, on success or on a mathematical
//! violation, an owned JSON report string that the caller releases with
//! [`fj_string_free`]. The message of the most recent failure on the calling
//! thread is available through [`fj_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use frobjet::cli::{try_run_with_config, Cli, CliError, Command, Format, ManifoldConfig};
use frobjet::symcore::parse;

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FjStatus {
    Ok = 0,
    /// The report was produced and records a failed check.
    MathViolation = 1,
    InvalidInput = 2,
    MissingFixture = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    Panic = 6,
}

/// Command selector for [`fj_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FjCommand {
    Validate = 0,
    Hierarchy = 1,
    Pencil = 2,
    Virasoro = 3,
    Integrate = 4,
    IntegrateDouble = 5,
    Poles = 6,
}

/// Truncation overrides. `p_max` or `g_max` below 0, or `m_max` below −1,
/// keeps the configured value.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FjOptions {
    pub p_max: i32,
    pub g_max: i32,
    pub m_max: i32,
}

/// Opaque manifold handle.
pub struct FjManifold {
    config: ManifoldConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: FjStatus, msg: &str) -> FjStatus {
    set_error(msg);
    status
}

fn status_of(e: &CliError) -> FjStatus {
    match e {
        CliError::Input(_) => FjStatus::InvalidInput,
        CliError::MissingFixture(_) => FjStatus::MissingFixture,
        CliError::Math(_) => FjStatus::MathViolation,
    }
}

/// # Safety
/// `s` must be null or a valid nul-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, FjStatus> {
    if s.is_null() {
        return Err(fail(FjStatus::NullPointer, &format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(FjStatus::InvalidUtf8, &format!("{what} is not UTF-8")))
}

fn into_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("no interior nul")
        .into_raw()
}

fn guarded(f: impl FnOnce() -> FjStatus) -> FjStatus {
    clear_error();
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(FjStatus::Panic, "internal panic"))
}

/// Parses a manifold configuration from JSON text.
///
/// # Safety
/// `json` must be a valid nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fj_manifold_from_json(
    json: *const c_char,
    out: *mut *mut FjManifold,
) -> FjStatus {
    guarded(|| {
        if out.is_null() {
            return fail(FjStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let text = match read_str(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ManifoldConfig::from_json(text) {
            Ok(config) => {
                *out = Box::into_raw(Box::new(FjManifold { config }));
                FjStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// Reads a manifold configuration from a JSON file.
///
/// # Safety
/// `path` must be a valid nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fj_manifold_from_path(
    path: *const c_char,
    out: *mut *mut FjManifold,
) -> FjStatus {
    guarded(|| {
        if out.is_null() {
            return fail(FjStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let p = match read_str(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match ManifoldConfig::load(std::path::Path::new(p)) {
            Ok(config) => {
                *out = Box::into_raw(Box::new(FjManifold { config }));
                FjStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `m` must be null or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fj_manifold_free(m: *mut FjManifold) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of the manifold, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fj_manifold_dimension(m: *const FjManifold) -> usize {
    m.as_ref().map_or(0, |m| m.config.n)
}

/// Runs a command and stores its JSON report in `*report`.
///
/// `expr` is required for `Integrate`, `IntegrateDouble` and `Poles` and
/// ignored otherwise. `options` may be null. The report is written for
/// `Ok` and `MathViolation`; on other codes `*report` is null.
///
/// # Safety
/// `m` must be a live handle, `expr` null or a valid string, `options` null
/// or valid, and `report` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fj_run(
    m: *const FjManifold,
    command: FjCommand,
    expr: *const c_char,
    options: *const FjOptions,
    report: *mut *mut c_char,
) -> FjStatus {
    guarded(|| {
        if report.is_null() {
            return fail(FjStatus::NullPointer, "report is null");
        }
        *report = ptr::null_mut();
        let Some(m) = m.as_ref() else {
            return fail(FjStatus::NullPointer, "manifold is null");
        };
        let needs_expr = matches!(
            command,
            FjCommand::Integrate | FjCommand::IntegrateDouble | FjCommand::Poles
        );
        let expr = if needs_expr {
            match read_str(expr, "expr") {
                Ok(e) => e.to_string(),
                Err(s) => return s,
            }
        } else {
            String::new()
        };
        let cmd = match command {
            FjCommand::Validate => Command::Validate,
            FjCommand::Hierarchy => Command::Hierarchy,
            FjCommand::Pencil => Command::Pencil,
            FjCommand::Virasoro => Command::Virasoro,
            FjCommand::Integrate => Command::Integrate {
                expr,
                double: false,
            },
            FjCommand::IntegrateDouble => Command::Integrate { expr, double: true },
            FjCommand::Poles => Command::Poles { expr },
        };
        let opts = options.as_ref();
        let pick = |f: fn(&FjOptions) -> i32, min: i32| opts.map(f).filter(|v| *v >= min);
        let cli = Cli {
            command: cmd,
            config: None,
            pmax: pick(|o| o.p_max, 0).map(|v| v as usize),
            gmax: pick(|o| o.g_max, 0).map(|v| v as u32),
            mmax: pick(|o| o.m_max, -1),
            out: None,
            format: Format::Machine,
        };
        match try_run_with_config(&cli, &m.config) {
            Ok(outcome) => {
                *report = into_c(outcome.text);
                if outcome.code == 0 {
                    FjStatus::Ok
                } else {
                    fail(FjStatus::MathViolation, "a check failed; see the report")
                }
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// Parses an expression and stores its canonical form in `*out`.
///
/// # Safety
/// `expr` must be a valid nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fj_canonicalize(expr: *const c_char, out: *mut *mut c_char) -> FjStatus {
    guarded(|| {
        if out.is_null() {
            return fail(FjStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let text = match read_str(expr, "expr") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse(text) {
            Ok(e) => {
                *out = into_c(e.to_string());
                FjStatus::Ok
            }
            Err(e) => fail(FjStatus::InvalidInput, &e.to_string()),
        }
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fj_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn fj_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn fj_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
