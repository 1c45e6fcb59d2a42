use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use frobjet_ffi::*;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> *mut FjManifold {
    let path = CString::new(configs().join(name).to_str().unwrap()).unwrap();
    let mut m = ptr::null_mut();
    let st = unsafe { fj_manifold_from_path(path.as_ptr(), &mut m) };
    assert_eq!(st, FjStatus::Ok, "{}", last_error());
    m
}

fn last_error() -> String {
    let p = fj_last_error();
    if p.is_null() {
        String::new()
    } else {
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }
}

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
    unsafe { fj_string_free(s) };
    out
}

fn run(m: *const FjManifold, cmd: FjCommand, expr: Option<&str>) -> (FjStatus, Option<String>) {
    let expr = expr.map(|e| CString::new(e).unwrap());
    let mut report = ptr::null_mut();
    let st = unsafe {
        fj_run(
            m,
            cmd,
            expr.as_ref().map_or(ptr::null(), |e| e.as_ptr()),
            ptr::null(),
            &mut report,
        )
    };
    let text = (!report.is_null()).then(|| take(report));
    (st, text)
}

#[test]
fn validate_and_pencil_reports() {
    let m = load("kdv-deformed.json");
    assert_eq!(unsafe { fj_manifold_dimension(m) }, 1);
    let (st, text) = run(m, FjCommand::Validate, None);
    assert_eq!(st, FjStatus::Ok);
    assert!(text.unwrap().contains("\"status\": \"pass\""));
    let (st, text) = run(m, FjCommand::Pencil, None);
    assert_eq!(st, FjStatus::Ok);
    assert!(text.unwrap().contains("1/24"));
    unsafe { fj_manifold_free(m) };
}

#[test]
fn violations_keep_the_report() {
    let m = load("corrupted-n3.json");
    let (st, text) = run(m, FjCommand::Validate, None);
    assert_eq!(st, FjStatus::MathViolation);
    assert!(text.unwrap().contains("-36*v2^2"));
    unsafe { fj_manifold_free(m) };
}

#[test]
fn missing_fixture_and_bad_input() {
    let m = load("p1.json");
    let (st, text) = run(m, FjCommand::Virasoro, None);
    assert_eq!(st, FjStatus::MissingFixture);
    assert!(text.is_none());
    assert!(last_error().contains("virasoro"));
    let (st, _) = run(m, FjCommand::Poles, None);
    assert_eq!(st, FjStatus::NullPointer);
    let (st, _) = run(m, FjCommand::Integrate, Some("v1 +* 2"));
    assert_eq!(st, FjStatus::InvalidInput);
    unsafe { fj_manifold_free(m) };

    let json = CString::new(r#"{"name":"x"}"#).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { fj_manifold_from_json(json.as_ptr(), &mut h) },
        FjStatus::InvalidInput
    );
    assert!(h.is_null());
    assert_eq!(
        unsafe { fj_manifold_from_json(ptr::null(), &mut h) },
        FjStatus::NullPointer
    );
}

#[test]
fn options_override_truncation() {
    let m = load("kdv.json");
    let opts = FjOptions {
        p_max: 0,
        g_max: -1,
        m_max: -2,
    };
    let mut report = ptr::null_mut();
    let st = unsafe { fj_run(m, FjCommand::Hierarchy, ptr::null(), &opts, &mut report) };
    assert_eq!(st, FjStatus::Ok);
    let short = take(report);
    let (_, full) = run(m, FjCommand::Hierarchy, None);
    assert!(short.len() < full.unwrap().len());
    unsafe { fj_manifold_free(m) };
}

#[test]
fn canonical_strings() {
    let e = CString::new("(v1^2 - 1)/(v1 - 1)").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { fj_canonicalize(e.as_ptr(), &mut out) },
        FjStatus::Ok
    );
    assert_eq!(take(out), "1 + v1");
    assert!(fj_last_error().is_null());
    let v = unsafe { CStr::from_ptr(fj_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    unsafe {
        fj_string_free(ptr::null_mut());
        fj_manifold_free(ptr::null_mut());
    }
}

#[test]
fn header_is_valid_c() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/frobjet.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in [
        "fj_manifold_from_json",
        "fj_run",
        "fj_string_free",
        "fj_last_error",
        "FJ_STATUS_MISSING_FIXTURE",
    ] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
        .expect("C compiler available");
    assert!(status.success());
}
