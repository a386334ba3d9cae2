use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use specbox_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(specbox_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn potential(json: &str) -> *mut SpecboxPotential {
    let mut p = ptr::null_mut();
    let rc = unsafe { specbox_potential_from_json(c(json).as_ptr(), &mut p) };
    assert_eq!(rc, SPECBOX_OK, "{}", last_error());
    p
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(specbox_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn potential_round_trip() {
    let p = potential(r#"{"sides": [1.0, 2.0], "terms": [{"m": [1, 0], "c": 0.5}]}"#);
    let mut v = 0.0;
    let x = [0.25, 0.7];
    assert_eq!(
        unsafe { specbox_potential_eval(p, x.as_ptr(), 2, &mut v) },
        SPECBOX_OK
    );
    assert!((v - 0.5 * (std::f64::consts::PI * 0.25).cos()).abs() < 1e-14);
    assert_eq!(
        unsafe { specbox_potential_eval(p, x.as_ptr(), 1, &mut v) },
        SPECBOX_ERR_INVALID
    );
    assert!(last_error().contains("dimension"));
    unsafe { specbox_potential_free(p) };
}

#[test]
fn parse_and_null_errors() {
    let mut p = ptr::null_mut();
    let rc = unsafe { specbox_potential_from_json(c("{not json").as_ptr(), &mut p) };
    assert_eq!(rc, SPECBOX_ERR_PARSE);
    assert!(p.is_null());
    assert!(!last_error().is_empty());
    let rc = unsafe { specbox_potential_from_json(ptr::null(), &mut p) };
    assert_eq!(rc, SPECBOX_ERR_NULL);
    unsafe {
        specbox_potential_free(ptr::null_mut());
        specbox_spectrum_free(ptr::null_mut());
        specbox_string_free(ptr::null_mut());
    }
}

#[test]
fn free_interval_spectrum() {
    let p = potential(r#"{"sides": [1.0], "terms": []}"#);
    let bcs = [SPECBOX_BC_DIRICHLET, SPECBOX_BC_DIRICHLET];
    let sizes = [32usize];
    let mut s = ptr::null_mut();
    let rc = unsafe { specbox_spectrum_solve(p, bcs.as_ptr(), sizes.as_ptr(), 1, &mut s) };
    assert_eq!(rc, SPECBOX_OK, "{}", last_error());
    let n = unsafe { specbox_spectrum_trusted(s) };
    assert_eq!(n, 8);

    let mut written = 0;
    let mut small = [0.0; 2];
    let rc = unsafe { specbox_spectrum_eigenvalues(s, small.as_mut_ptr(), 2, &mut written) };
    assert_eq!(rc, SPECBOX_ERR_BUFFER);
    assert_eq!(written, n);

    let mut buf = vec![0.0; n];
    let rc = unsafe { specbox_spectrum_eigenvalues(s, buf.as_mut_ptr(), n, &mut written) };
    assert_eq!(rc, SPECBOX_OK);
    for (j, mu) in buf.iter().enumerate() {
        let k = (j + 1) as f64 * std::f64::consts::PI;
        assert!((mu - k * k).abs() < 1e-9 * k * k);
    }

    let (mut v, mut tail) = (0.0, 0.0);
    assert_eq!(
        unsafe { specbox_spectrum_heat_trace(s, 0.1, &mut v, &mut tail) },
        SPECBOX_OK
    );
    let want: f64 = buf.iter().map(|m| (-m * 0.1).exp()).sum();
    assert!((v - want).abs() < 1e-14 && tail >= 0.0);
    assert_eq!(
        unsafe { specbox_spectrum_heat_trace(s, -1.0, &mut v, &mut tail) },
        SPECBOX_ERR_INVALID
    );

    let bad = [SPECBOX_BC_DIRICHLET, 7];
    let mut s2 = ptr::null_mut();
    let rc = unsafe { specbox_spectrum_solve(p, bad.as_ptr(), sizes.as_ptr(), 1, &mut s2) };
    assert_eq!(rc, SPECBOX_ERR_INVALID);
    assert!(s2.is_null());
    unsafe {
        specbox_spectrum_free(s);
        specbox_potential_free(p);
    }
}

#[test]
fn cap_is_reported() {
    let p = potential(r#"{"sides": [1.0, 1.0], "terms": []}"#);
    let bcs = [SPECBOX_BC_DIRICHLET; 4];
    let sizes = [400usize, 400];
    let mut s = ptr::null_mut();
    let rc = unsafe { specbox_spectrum_solve(p, bcs.as_ptr(), sizes.as_ptr(), 2, &mut s) };
    assert_eq!(rc, SPECBOX_ERR_CAP);
    unsafe { specbox_potential_free(p) };
}

#[test]
fn run_returns_report() {
    let cfg = c(r#"{"problem": {"sides": [1.0]}, "params": {"sizes": [16]}}"#);
    let mut out = ptr::null_mut();
    let rc = unsafe { specbox_run(cfg.as_ptr(), c("spectrum").as_ptr(), 0, &mut out) };
    assert_eq!(rc, SPECBOX_OK, "{}", last_error());
    let doc: serde_json::Value =
        serde_json::from_str(unsafe { CStr::from_ptr(out) }.to_str().unwrap()).unwrap();
    assert_eq!(doc["task"], "spectrum");
    assert_eq!(doc["schema_version"], 1);
    unsafe { specbox_string_free(out) };

    let rc = unsafe { specbox_run(cfg.as_ptr(), c("dance").as_ptr(), 0, &mut out) };
    assert_eq!(rc, SPECBOX_ERR_INVALID);
    assert!(out.is_null());
}

#[test]
fn failed_verification_keeps_report() {
    let cfg = c(r#"{"problem": {"sides": [1.0, 1.0]},
        "potential": {"sides": [1.0, 1.0], "terms": [{"m": [1, 1], "c": 1.0}]},
        "params": {"verify": {"size": 4, "max_tail": 1e300, "refine": false}}}"#);
    let mut out = ptr::null_mut();
    let rc = unsafe { specbox_run(cfg.as_ptr(), c("verify").as_ptr(), 0, &mut out) };
    assert_eq!(rc, SPECBOX_ERR_VERIFY);
    assert!(!out.is_null());
    let doc: serde_json::Value =
        serde_json::from_str(unsafe { CStr::from_ptr(out) }.to_str().unwrap()).unwrap();
    assert_eq!(doc["pass"], false);
    unsafe { specbox_string_free(out) };
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/specbox.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "specbox_run",
        "specbox_spectrum_solve",
        "SpecboxPotential",
        "SPECBOX_ERR_CAP",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile_dir();
    let src = dir.join("probe.c");
    std::fs::write(
        &src,
        "#include \"specbox.h\"\nint probe(void) { SpecboxPotential *p = 0; specbox_potential_free(p); return SPECBOX_OK; }\n",
    )
    .unwrap();
    let status = match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
    {
        Ok(s) => s,
        Err(_) => return, // no C compiler on this machine
    };
    assert!(status.success());
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("specbox-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
