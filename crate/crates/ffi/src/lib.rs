//! C interface to `specbox`.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every fallible call returns a
//! `SPECBOX_*` status code; the message of the most recent failure on the
//! calling thread is available from [`specbox_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use specbox::basis::Mode;
use specbox::eignd::solve_nd;
use specbox::model::{build_potential, Bc, BoxProblem, CosineSpec, TrigPotential};
use specbox::report::{report_json, run, RunConfig, Task};
use specbox::spectrum::Spectrum;
use specbox::Error;

pub const SPECBOX_OK: c_int = 0;
pub const SPECBOX_ERR_NULL: c_int = 1;
pub const SPECBOX_ERR_UTF8: c_int = 2;
pub const SPECBOX_ERR_PARSE: c_int = 3;
pub const SPECBOX_ERR_INVALID: c_int = 4;
pub const SPECBOX_ERR_CAP: c_int = 5;
pub const SPECBOX_ERR_NUMERIC: c_int = 6;
pub const SPECBOX_ERR_BUFFER: c_int = 7;
pub const SPECBOX_ERR_VERIFY: c_int = 8;
pub const SPECBOX_ERR_PANIC: c_int = 99;

pub const SPECBOX_BC_DIRICHLET: c_int = 0;
pub const SPECBOX_BC_NEUMANN: c_int = 1;

/// Potential on a box.
pub struct SpecboxPotential(TrigPotential);

/// Eigenvalues of a box problem.
pub struct SpecboxSpectrum(Spectrum);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(c_int, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Json(_) => SPECBOX_ERR_PARSE,
            Error::CapExceeded { .. } => SPECBOX_ERR_CAP,
            Error::Eigen
            | Error::NoConvergence(_)
            | Error::IllConditioned(_)
            | Error::TailTooLarge { .. } => SPECBOX_ERR_NUMERIC,
            _ => SPECBOX_ERR_INVALID,
        };
        Failure(code, e.to_string())
    }
}

fn fail(code: c_int, msg: impl Into<String>) -> Failure {
    Failure(code, msg.into())
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> c_int {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SPECBOX_OK
        }
        Ok(Err(Failure(code, msg))) => {
            set_error(&msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            SPECBOX_ERR_PANIC
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(SPECBOX_ERR_NULL, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SPECBOX_ERR_UTF8, format!("{what} is not UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(SPECBOX_ERR_NULL, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(SPECBOX_ERR_NULL, format!("{what} is null")))
}

fn bc(code: c_int) -> Result<Bc, Failure> {
    match code {
        SPECBOX_BC_DIRICHLET => Ok(Bc::Dirichlet),
        SPECBOX_BC_NEUMANN => Ok(Bc::Neumann),
        c => Err(fail(
            SPECBOX_ERR_INVALID,
            format!("unknown face condition {c}"),
        )),
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn specbox_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn specbox_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Build a potential from a cosine-series JSON document
/// `{"sides": [...], "terms": [{"m": [...], "c": ...}]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out_potential` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn specbox_potential_from_json(
    json: *const c_char,
    out_potential: *mut *mut SpecboxPotential,
) -> c_int {
    guard(|| {
        let slot = out(out_potential, "out_potential")?;
        *slot = ptr::null_mut();
        let spec: CosineSpec = serde_json::from_str(text(json, "json")?).map_err(Error::from)?;
        let p = build_potential(&spec)?;
        *slot = Box::into_raw(Box::new(SpecboxPotential(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must come from `specbox_potential_from_json` or be null.
#[no_mangle]
pub unsafe extern "C" fn specbox_potential_free(p: *mut SpecboxPotential) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Evaluate the potential at a point of dimension `n`.
///
/// # Safety
/// `x` must hold `n` doubles and `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn specbox_potential_eval(
    p: *const SpecboxPotential,
    x: *const f64,
    n: usize,
    value: *mut f64,
) -> c_int {
    guard(|| {
        let p = p
            .as_ref()
            .ok_or_else(|| fail(SPECBOX_ERR_NULL, "potential is null"))?;
        let x = slice(x, n, "x")?;
        *out(value, "value")? = p.0.evaluate(x)?;
        Ok(())
    })
}

/// Solve the box problem on the potential's box. `bcs` holds `2 n` face
/// codes (lower, upper per axis) and `sizes` the `n` basis sizes.
///
/// # Safety
/// Array arguments must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn specbox_spectrum_solve(
    p: *const SpecboxPotential,
    bcs: *const c_int,
    sizes: *const usize,
    n: usize,
    out_spectrum: *mut *mut SpecboxSpectrum,
) -> c_int {
    guard(|| {
        let slot = out(out_spectrum, "out_spectrum")?;
        *slot = ptr::null_mut();
        let p = p
            .as_ref()
            .ok_or_else(|| fail(SPECBOX_ERR_NULL, "potential is null"))?;
        if n != p.0.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.0.dim(),
                got: n,
            }
            .into());
        }
        let codes = slice(bcs, 2 * n, "bcs")?;
        let faces = codes
            .chunks(2)
            .map(|c| Ok((bc(c[0])?, bc(c[1])?)))
            .collect::<Result<Vec<_>, Failure>>()?;
        let b = BoxProblem::new(p.0.sides().to_vec(), faces)?;
        let s = solve_nd(
            &p.0,
            &b,
            slice(sizes, n, "sizes")?,
            &Mode::IntervalFaces,
            false,
        )?;
        *slot = Box::into_raw(Box::new(SpecboxSpectrum(s)));
        Ok(())
    })
}

/// # Safety
/// `s` must come from `specbox_spectrum_solve` or be null.
#[no_mangle]
pub unsafe extern "C" fn specbox_spectrum_free(s: *mut SpecboxSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of trusted eigenvalues, or 0 for a null handle.
///
/// # Safety
/// `s` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn specbox_spectrum_trusted(s: *const SpecboxSpectrum) -> usize {
    s.as_ref().map_or(0, |s| s.0.trusted)
}

/// Copy the trusted eigenvalues into `buf`. `written` receives the trusted
/// count; `SPECBOX_ERR_BUFFER` is returned if `cap` is smaller.
///
/// # Safety
/// `buf` must hold `cap` doubles and `written` must be valid.
#[no_mangle]
pub unsafe extern "C" fn specbox_spectrum_eigenvalues(
    s: *const SpecboxSpectrum,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> c_int {
    guard(|| {
        let s = s
            .as_ref()
            .ok_or_else(|| fail(SPECBOX_ERR_NULL, "spectrum is null"))?;
        let eigs = s.0.trusted_eigenvalues();
        *out(written, "written")? = eigs.len();
        if cap < eigs.len() {
            return Err(fail(
                SPECBOX_ERR_BUFFER,
                format!("buffer holds {cap}, need {}", eigs.len()),
            ));
        }
        if !eigs.is_empty() {
            if buf.is_null() {
                return Err(fail(SPECBOX_ERR_NULL, "buf is null"));
            }
            ptr::copy_nonoverlapping(eigs.as_ptr(), buf, eigs.len());
        }
        Ok(())
    })
}

/// Partial heat trace over the trusted eigenvalues and a bound on the rest.
///
/// # Safety
/// `value` and `tail_bound` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn specbox_spectrum_heat_trace(
    s: *const SpecboxSpectrum,
    t: f64,
    value: *mut f64,
    tail_bound: *mut f64,
) -> c_int {
    guard(|| {
        let s = s
            .as_ref()
            .ok_or_else(|| fail(SPECBOX_ERR_NULL, "spectrum is null"))?;
        if !(t > 0.0) {
            return Err(Error::NonPositiveTime(t).into());
        }
        *out(value, "value")? = s.0.partial_trace(t);
        *out(tail_bound, "tail_bound")? = s.0.tail_bound(t);
        Ok(())
    })
}

/// Run a task (`"spectrum"`, `"heat-trace"`, `"fit"`, `"decompose"`,
/// `"invariants"`, `"compare"`, `"verify"`) on a JSON run configuration.
/// The JSON report is returned in `out_json`, to be released with
/// `specbox_string_free`. A failed verification still produces the report
/// and returns `SPECBOX_ERR_VERIFY`.
///
/// # Safety
/// `config_json` and `task` must be NUL-terminated strings and `out_json`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn specbox_run(
    config_json: *const c_char,
    task: *const c_char,
    seed: u64,
    out_json: *mut *mut c_char,
) -> c_int {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        *slot = ptr::null_mut();
        let config = RunConfig::from_json(text(config_json, "config_json")?)?;
        let name = text(task, "task")?;
        let task: Task = serde_json::from_value(serde_json::Value::String(name.into()))
            .map_err(|_| fail(SPECBOX_ERR_INVALID, format!("unknown task {name:?}")))?;
        let output = run(&config, task, seed)?;
        let doc =
            serde_json::to_string(&report_json(&config, &output, seed)).map_err(Error::from)?;
        *slot = CString::new(doc)
            .map_err(|_| fail(SPECBOX_ERR_INVALID, "report contains NUL"))?
            .into_raw();
        if output.exit_code() != 0 {
            return Err(fail(
                SPECBOX_ERR_VERIFY,
                format!("{task}: verification failed"),
            ));
        }
        Ok(())
    })
}

/// # Safety
/// `s` must come from `specbox_run` or be null.
#[no_mangle]
pub unsafe extern "C" fn specbox_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
