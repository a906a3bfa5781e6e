//! C interface to the normal-form engine.
//!
//! Problems and reports are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`DnormStatus`]; on failure [`dnorm_last_error`] describes the cause on the
//! calling thread. Strings returned as `char *` are released with
//! [`dnorm_string_free`]; `const char *` results are borrowed from their handle.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dnorm::cli::{self, Action, Method, ProblemFile, Report};

/// Result of an FFI call. Values 2 to 5 match the `dnorm` exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DnormStatus {
    Ok = 0,
    Parse = 2,
    Resonance = 3,
    Validity = 4,
    Invariant = 5,
    NullPointer = 10,
    InvalidUtf8 = 11,
    InvalidArgument = 12,
    Panic = 13,
}

impl DnormStatus {
    fn from_exit(code: i32) -> Self {
        match code {
            0 => DnormStatus::Ok,
            2 => DnormStatus::Parse,
            3 => DnormStatus::Resonance,
            4 => DnormStatus::Validity,
            _ => DnormStatus::Invariant,
        }
    }
}

/// The computation requested by [`dnorm_run`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DnormCommand {
    NormalizeDirect = 0,
    NormalizeRenorm = 1,
    NormalizeEv = 2,
    Correct = 3,
    Linearize = 4,
    Birkhoff = 5,
    Check = 6,
}

impl From<DnormCommand> for Action {
    fn from(c: DnormCommand) -> Action {
        match c {
            DnormCommand::NormalizeDirect => Action::Normalize(Method::Direct),
            DnormCommand::NormalizeRenorm => Action::Normalize(Method::Renorm),
            DnormCommand::NormalizeEv => Action::Normalize(Method::Ev),
            DnormCommand::Correct => Action::Correct,
            DnormCommand::Linearize => Action::Linearize,
            DnormCommand::Birkhoff => Action::Birkhoff,
            DnormCommand::Check => Action::Check,
        }
    }
}

/// A parsed problem file.
pub struct DnormProblem {
    inner: ProblemFile,
}

/// The outcome of one run, with its JSON rendering.
pub struct DnormReport {
    inner: Report,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> DnormStatus) -> DnormStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            DnormStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, DnormStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(DnormStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        DnormStatus::InvalidUtf8
    })
}

/// Message for the last failed call on this thread, or NULL.
///
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn dnorm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn dnorm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses problem-file text into a new handle stored in `*out`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dnorm_problem_parse(
    text: *const c_char,
    out: *mut *mut DnormProblem,
) -> DnormStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return DnormStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match cli::parse_problem(text) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(DnormProblem { inner: p }));
                DnormStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                DnormStatus::from_exit(cli::exit_code(&e))
            }
        }
    })
}

/// Releases a problem. NULL is ignored.
///
/// # Safety
/// `p` must come from [`dnorm_problem_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dnorm_problem_free(p: *mut DnormProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Overrides the grade order `N`; `order` must be positive.
///
/// # Safety
/// `p` must be a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn dnorm_problem_set_order(p: *mut DnormProblem, order: u32) -> DnormStatus {
    guard(|| match p.as_mut() {
        None => {
            set_error("null problem");
            DnormStatus::NullPointer
        }
        Some(_) if order == 0 => {
            set_error("order must be positive");
            DnormStatus::InvalidArgument
        }
        Some(p) => {
            p.inner.order = order as usize;
            DnormStatus::Ok
        }
    })
}

/// Overrides the `e`-validity target `K`; `k` must be non-negative.
///
/// # Safety
/// `p` must be a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn dnorm_problem_set_eps_order(p: *mut DnormProblem, k: i32) -> DnormStatus {
    guard(|| match p.as_mut() {
        None => {
            set_error("null problem");
            DnormStatus::NullPointer
        }
        Some(_) if k < 0 => {
            set_error("eps order must be non-negative");
            DnormStatus::InvalidArgument
        }
        Some(p) => {
            p.inner.eps_order = Some(k);
            DnormStatus::Ok
        }
    })
}

/// Overrides the twist truncation `T`.
///
/// # Safety
/// `p` must be a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn dnorm_problem_set_tau_order(p: *mut DnormProblem, t: u8) -> DnormStatus {
    guard(|| match p.as_mut() {
        None => {
            set_error("null problem");
            DnormStatus::NullPointer
        }
        Some(p) => {
            p.inner.tau_order = Some(t);
            DnormStatus::Ok
        }
    })
}

/// Canonical problem-file text; release with [`dnorm_string_free`].
///
/// # Safety
/// `p` must be a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn dnorm_problem_serialize(p: *const DnormProblem) -> *mut c_char {
    clear_error();
    let Some(p) = p.as_ref() else {
        set_error("null problem");
        return ptr::null_mut();
    };
    match catch_unwind(AssertUnwindSafe(|| cli::serialize(&p.inner))) {
        Ok(text) => CString::new(text).map_or(ptr::null_mut(), CString::into_raw),
        Err(_) => {
            set_error("internal panic");
            ptr::null_mut()
        }
    }
}

/// Runs `command` on `p` and stores the report in `*out`.
///
/// A report is produced whenever the problem was readable, including for
/// resonant or otherwise failing runs; the status then mirrors the report's
/// exit code.
///
/// # Safety
/// `p` must be a live problem handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dnorm_run(
    p: *const DnormProblem,
    command: DnormCommand,
    out: *mut *mut DnormReport,
) -> DnormStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return DnormStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let Some(p) = p.as_ref() else {
            set_error("null problem");
            return DnormStatus::NullPointer;
        };
        let report = cli::run(command.into(), &p.inner);
        let status = DnormStatus::from_exit(report.exit);
        if let Some(err) = &report.error {
            set_error(err.message.clone());
        } else if status != DnormStatus::Ok {
            set_error("an invariant check failed");
        }
        let json = CString::new(report.to_json()).expect("JSON has no NUL");
        *out = Box::into_raw(Box::new(DnormReport { inner: report, json }));
        status
    })
}

/// JSON text of a report, borrowed from the handle.
///
/// # Safety
/// `r` must be a live report handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn dnorm_report_json(r: *const DnormReport) -> *const c_char {
    r.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// Exit code recorded in a report, or -1 for NULL.
///
/// # Safety
/// `r` must be a live report handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn dnorm_report_exit(r: *const DnormReport) -> i32 {
    r.as_ref().map_or(-1, |r| r.inner.exit)
}

/// Number of checks in a report, and how many of them failed.
///
/// # Safety
/// `r` must be a live report handle; `failed` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn dnorm_report_checks(r: *const DnormReport, failed: *mut u32) -> u32 {
    let Some(r) = r.as_ref() else { return 0 };
    if let Some(f) = failed.as_mut() {
        *f = r.inner.checks.iter().filter(|c| !c.pass).count() as u32;
    }
    r.inner.checks.len() as u32
}

/// Releases a report. NULL is ignored.
///
/// # Safety
/// `r` must come from [`dnorm_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dnorm_report_free(r: *mut DnormReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dnorm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
