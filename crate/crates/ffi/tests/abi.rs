use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use dnorm_ffi::*;

const TOY: &str = "vars: x y\nlambda: 1 0\ndelta: grading\norder: 6\nfield:\n  2 * y^2 d/dy\n  3 * x * y^2 d/dy\n";

fn parse(text: &str) -> (DnormStatus, *mut DnormProblem) {
    let c = CString::new(text).unwrap();
    let mut p = ptr::null_mut();
    let st = unsafe { dnorm_problem_parse(c.as_ptr(), &mut p) };
    (st, p)
}

fn last_error() -> String {
    let e = dnorm_last_error();
    assert!(!e.is_null());
    unsafe { CStr::from_ptr(e) }.to_str().unwrap().to_owned()
}

#[test]
fn renormalized_run() {
    let (st, p) = parse(TOY);
    assert_eq!(st, DnormStatus::Ok);
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(dnorm_run(p, DnormCommand::NormalizeRenorm, &mut r), DnormStatus::Ok);
        let json = CStr::from_ptr(dnorm_report_json(r)).to_str().unwrap();
        assert!(json.contains("\"2 * y^2 d/dy\""));
        let mut failed = 7;
        assert!(dnorm_report_checks(r, &mut failed) > 0);
        assert_eq!(failed, 0);
        assert_eq!(dnorm_report_exit(r), 0);
        dnorm_report_free(r);
        dnorm_problem_free(p);
    }
    assert!(dnorm_last_error().is_null());
}

#[test]
fn resonance_status_and_message() {
    let (_, p) = parse(TOY);
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(dnorm_run(p, DnormCommand::Linearize, &mut r), DnormStatus::Resonance);
        assert!(!r.is_null());
        assert_eq!(dnorm_report_exit(r), 3);
        assert!(last_error().contains("y^2 d/dy"));
        dnorm_report_free(r);
        dnorm_problem_free(p);
    }
}

#[test]
fn parse_failures() {
    let (st, p) = parse("vars: x y\nlambda: 1\n");
    assert_eq!(st, DnormStatus::Parse);
    assert!(p.is_null());
    assert!(last_error().starts_with("line 2"));
    let bad = [0xffu8, 0];
    let mut p = ptr::null_mut();
    let st = unsafe { dnorm_problem_parse(bad.as_ptr().cast(), &mut p) };
    assert_eq!(st, DnormStatus::InvalidUtf8);
}

#[test]
fn null_arguments() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(dnorm_problem_parse(ptr::null(), &mut p), DnormStatus::NullPointer);
        let c = CString::new(TOY).unwrap();
        assert_eq!(dnorm_problem_parse(c.as_ptr(), ptr::null_mut()), DnormStatus::NullPointer);
        let mut r = ptr::null_mut();
        assert_eq!(dnorm_run(ptr::null(), DnormCommand::Check, &mut r), DnormStatus::NullPointer);
        assert!(r.is_null());
        assert_eq!(dnorm_problem_set_order(ptr::null_mut(), 3), DnormStatus::NullPointer);
        assert!(dnorm_report_json(ptr::null()).is_null());
        assert_eq!(dnorm_report_exit(ptr::null()), -1);
        assert!(dnorm_problem_serialize(ptr::null()).is_null());
        dnorm_problem_free(ptr::null_mut());
        dnorm_report_free(ptr::null_mut());
        dnorm_string_free(ptr::null_mut());
    }
}

#[test]
fn overrides_and_serialization() {
    let (_, p) = parse(TOY);
    unsafe {
        assert_eq!(dnorm_problem_set_order(p, 0), DnormStatus::InvalidArgument);
        assert_eq!(dnorm_problem_set_eps_order(p, -1), DnormStatus::InvalidArgument);
        assert_eq!(dnorm_problem_set_order(p, 4), DnormStatus::Ok);
        assert_eq!(dnorm_problem_set_eps_order(p, 9), DnormStatus::Ok);
        assert_eq!(dnorm_problem_set_tau_order(p, 2), DnormStatus::Ok);
        let s = dnorm_problem_serialize(p);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        dnorm_string_free(s);
        assert!(text.contains("order: 4\n"));
        assert!(text.contains("eps-order: 9\n"));
        assert!(text.contains("tau-order: 2\n"));
        let (st, q) = parse(&text);
        assert_eq!(st, DnormStatus::Ok);
        let again = dnorm_problem_serialize(q);
        assert_eq!(CStr::from_ptr(again).to_str().unwrap(), text);
        dnorm_string_free(again);
        dnorm_problem_free(q);
        dnorm_problem_free(p);
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(dnorm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// Compiles the C smoke test against the generated header and static library.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libdnorm_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let out = profile_dir.join("dnorm_c_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout), "ok\n");
}
