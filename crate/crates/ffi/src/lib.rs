// SPDX-License-Identifier: Apache-2.0

//! C interface. Every object crosses the boundary as an opaque handle owned
//! by the caller and released with its `_free` function. Every fallible call
//! returns an [`RtlsymStatus`]; on failure the thread's last error message
//! is replaced and output parameters are left untouched.
//!
//! Strings returned to C are NUL-terminated and must be released with
//! [`rtlsym_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rtlsym::elab::RtlDesign;
use rtlsym::flow::{self, Error, HarnessOverrides};
use rtlsym::replay::{report, CoverageData};
use rtlsym::symexec::{read_suite, write_suite, InputPlan, RunOptions, TestSuite};

/// Result of every fallible call.
#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RtlsymStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Syntax = 4,
    Elaboration = 5,
    Harness = 6,
    Execution = 7,
    Replay = 8,
    Coverage = 9,
    Panic = 10,
}

/// Elaborated design.
pub struct RtlsymDesign(RtlDesign);

/// Harness resolved against a design.
pub struct RtlsymPlan(InputPlan);

/// Generated or parsed test suite.
pub struct RtlsymSuite(TestSuite);

/// Merged coverage counters of a replayed suite.
pub struct RtlsymCoverage(CoverageData);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RtlsymStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => RtlsymStatus::Io,
            Error::Frontend(_) => RtlsymStatus::Syntax,
            Error::Elab(_) => RtlsymStatus::Elaboration,
            Error::Harness(_) => RtlsymStatus::Harness,
            Error::Exec(_) => RtlsymStatus::Execution,
            Error::Vector(_) | Error::Sim(_) | Error::TraceMismatch { .. } => RtlsymStatus::Replay,
            Error::Coverage(_) | Error::CoverageFile(_) => RtlsymStatus::Coverage,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    // Interior NULs cannot be represented; drop them.
    let c = CString::new(msg.replace('\0', "")).unwrap_or_default();
    LAST_ERROR.with(|l| *l.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RtlsymStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RtlsymStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            RtlsymStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(RtlsymStatus::NullArgument, format!("{what} is null"))
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(RtlsymStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` is null or points to a live value of type `T`.
unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn give<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    // SAFETY: checked non-null; the caller provides writable storage.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

fn give_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let c = CString::new(s.replace('\0', "")).unwrap_or_default();
    // SAFETY: checked non-null.
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Message of the last failed call on this thread, or null if none failed.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rtlsym_last_error() -> *const c_char {
    LAST_ERROR.with(|l| l.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or was returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and elaborates the Verilog file at `path`.
///
/// # Safety
/// `path` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_design_load(
    path: *const c_char,
    out: *mut *mut RtlsymDesign,
) -> RtlsymStatus {
    guard(|| {
        let path = text(path, "path")?;
        give(out, RtlsymDesign(flow::load_design(Path::new(path))?))
    })
}

/// Parses and elaborates `source`; `file` names it in diagnostics.
///
/// # Safety
/// `file` and `source` are NUL-terminated strings; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_design_from_source(
    file: *const c_char,
    source: *const c_char,
    out: *mut *mut RtlsymDesign,
) -> RtlsymStatus {
    guard(|| {
        let file = text(file, "file")?;
        let source = text(source, "source")?;
        give(out, RtlsymDesign(flow::design_from_source(file, source)?))
    })
}

/// # Safety
/// `d` is null or a live design handle.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_design_free(d: *mut RtlsymDesign) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Resolves harness text against a design. `max_cycles` overrides the
/// harness bound when non-zero.
///
/// # Safety
/// `design` is a live handle; `harness` is a NUL-terminated string; `out`
/// is writable.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_plan_from_text(
    design: *const RtlsymDesign,
    harness: *const c_char,
    max_cycles: u32,
    out: *mut *mut RtlsymPlan,
) -> RtlsymStatus {
    guard(|| {
        let d = borrow(design, "design")?;
        let h = text(harness, "harness")?;
        let ov = HarnessOverrides {
            max_cycles: (max_cycles > 0).then_some(max_cycles),
            ..HarnessOverrides::default()
        };
        give(out, RtlsymPlan(flow::plan_from_text(h, &d.0, &ov)?))
    })
}

/// # Safety
/// `p` is null or a live plan handle.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_plan_free(p: *mut RtlsymPlan) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Generates a suite with the built-in solver. Output does not depend on
/// `jobs`.
///
/// # Safety
/// `design` and `plan` are live handles, the plan resolved against this
/// design; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_testgen(
    design: *const RtlsymDesign,
    plan: *const RtlsymPlan,
    jobs: u32,
    out: *mut *mut RtlsymSuite,
) -> RtlsymStatus {
    guard(|| {
        let d = borrow(design, "design")?;
        let p = borrow(plan, "plan")?;
        let opts = RunOptions {
            jobs: jobs as usize,
            ..RunOptions::default()
        };
        let run = flow::testgen(&d.0, &p.0, &opts)?;
        give(out, RtlsymSuite(run.suite))
    })
}

/// Parses suite text written by [`rtlsym_suite_to_text`] or the CLI.
///
/// # Safety
/// `design` is a live handle; `suite` is a NUL-terminated string; `out` is
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_suite_from_text(
    design: *const RtlsymDesign,
    suite: *const c_char,
    out: *mut *mut RtlsymSuite,
) -> RtlsymStatus {
    guard(|| {
        let d = borrow(design, "design")?;
        let s = text(suite, "suite")?;
        give(out, RtlsymSuite(read_suite(&d.0, s).map_err(Error::from)?))
    })
}

/// Serializes a suite; release the result with [`rtlsym_string_free`].
///
/// # Safety
/// `design` and `suite` are live handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_suite_to_text(
    design: *const RtlsymDesign,
    suite: *const RtlsymSuite,
    out: *mut *mut c_char,
) -> RtlsymStatus {
    guard(|| {
        let d = borrow(design, "design")?;
        let s = borrow(suite, "suite")?;
        give_string(out, write_suite(&d.0, &s.0))
    })
}

/// Number of tests in a suite; 0 for a null handle.
///
/// # Safety
/// `suite` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_suite_tests(suite: *const RtlsymSuite) -> u64 {
    suite.as_ref().map_or(0, |s| s.0.tests.len() as u64)
}

/// Number of input vectors over all tests; 0 for a null handle.
///
/// # Safety
/// `suite` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_suite_vectors(suite: *const RtlsymSuite) -> u64 {
    suite.as_ref().map_or(0, |s| s.0.total_vectors())
}

/// # Safety
/// `s` is null or a live suite handle.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_suite_free(s: *mut RtlsymSuite) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Replays every test, checks recorded branch traces and merges coverage.
///
/// # Safety
/// All handles are live and belong to the same design; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_simulate(
    design: *const RtlsymDesign,
    plan: *const RtlsymPlan,
    suite: *const RtlsymSuite,
    jobs: u32,
    out: *mut *mut RtlsymCoverage,
) -> RtlsymStatus {
    guard(|| {
        let d = borrow(design, "design")?;
        let p = borrow(plan, "plan")?;
        let s = borrow(suite, "suite")?;
        let cov = flow::replay_suite(&d.0, &p.0, &s.0, jobs as usize)?;
        give(out, RtlsymCoverage(cov))
    })
}

/// Statement and branch-arm coverage in tenths of a percent.
///
/// # Safety
/// `design` and `coverage` are live handles; the outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_coverage_percent(
    design: *const RtlsymDesign,
    coverage: *const RtlsymCoverage,
    stmt_tenths: *mut u32,
    branch_tenths: *mut u32,
) -> RtlsymStatus {
    guard(|| {
        let d = borrow(design, "design")?;
        let c = borrow(coverage, "coverage")?;
        if stmt_tenths.is_null() || branch_tenths.is_null() {
            return Err(null("output pointer"));
        }
        let r = report(&d.0, &c.0).map_err(Error::from)?;
        // Percent tenths never exceed 1000.
        *stmt_tenths = r.stmt_pct.tenths as u32;
        *branch_tenths = r.branch_pct.tenths as u32;
        Ok(())
    })
}

/// Text coverage report; release the result with [`rtlsym_string_free`].
///
/// # Safety
/// `design` and `coverage` are live handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_coverage_report(
    design: *const RtlsymDesign,
    coverage: *const RtlsymCoverage,
    out: *mut *mut c_char,
) -> RtlsymStatus {
    guard(|| {
        let d = borrow(design, "design")?;
        let c = borrow(coverage, "coverage")?;
        let r = report(&d.0, &c.0).map_err(Error::from)?;
        give_string(out, r.to_text())
    })
}

/// Coverage counters as JSON; release the result with
/// [`rtlsym_string_free`].
///
/// # Safety
/// `coverage` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_coverage_to_json(
    coverage: *const RtlsymCoverage,
    out: *mut *mut c_char,
) -> RtlsymStatus {
    guard(|| {
        let c = borrow(coverage, "coverage")?;
        give_string(out, flow::coverage_to_json(&c.0))
    })
}

/// # Safety
/// `c` is null or a live coverage handle.
#[no_mangle]
pub unsafe extern "C" fn rtlsym_coverage_free(c: *mut RtlsymCoverage) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}
