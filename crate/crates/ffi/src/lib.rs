//! C ABI over `colombeau-lab`.
//!
//! Every fallible call returns a [`ClStatus`]; on failure the message is
//! available from [`cl_last_error`] on the same thread. Handles are opaque
//! and owned by the caller, who releases them with the matching `_free`.
//! Strings returned through `out` parameters are released with
//! [`cl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use colombeau_lab::asymptotics::{negligibility_falsifier, sweep_report, EpsGrid, FalsifierParams, NegligibilityStatus};
use colombeau_lab::cli::{execute, RunConfig};
use colombeau_lab::exprdsl::{format, parse};
use colombeau_lab::funcspace::{CompactSet, Domain};
use colombeau_lab::genfunc::{eval, KernelArg, Representative};
use colombeau_lab::mollifier::{build_moment_mollifier, scale, Mollifier};
use colombeau_lab::quadrature::QuadConfig;
use colombeau_lab::seminorm::SupConfig;
use colombeau_lab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidParam = 3,
    OrderBudget = 4,
    UnknownFunction = 5,
    NonConvergence = 6,
    Construction = 7,
    Domain = 8,
    EmptySet = 9,
    Syntax = 10,
    InsufficientSamples = 11,
    Unsupported = 12,
    Json = 13,
    Panic = 14,
}

/// A moment mollifier.
pub struct ClMollifier(Mollifier);

/// A parsed expression bound to its domain.
pub struct ClExpr {
    text: String,
    rep: Representative,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> ClStatus {
    match err {
        Error::OrderBudget { .. } => ClStatus::OrderBudget,
        Error::UnknownFunction(_) => ClStatus::UnknownFunction,
        Error::InvalidParam(_) => ClStatus::InvalidParam,
        Error::NonConvergence { .. } => ClStatus::NonConvergence,
        Error::Construction { .. } => ClStatus::Construction,
        Error::Domain(_) => ClStatus::Domain,
        Error::EmptySet(_) => ClStatus::EmptySet,
        Error::Syntax { .. } => ClStatus::Syntax,
        Error::InsufficientSamples { .. } => ClStatus::InsufficientSamples,
        Error::Unsupported(_) => ClStatus::Unsupported,
    }
}

struct Fail(ClStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ClStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ClStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            ClStatus::Panic
        }
    }
}

fn null() -> Fail {
    Fail(ClStatus::NullPointer, "null pointer argument".into())
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(ClStatus::InvalidUtf8, "argument is not valid UTF-8".into()))
}

unsafe fn ref_arg<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(null)
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

fn c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s).map(CString::into_raw).map_err(|_| Fail(ClStatus::InvalidParam, "interior NUL in output".into()))
}

/// Message for the last failed call on this thread, empty after a
/// success. Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn cl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn cl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn cl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds `φ ∈ 𝒜_q` supported in `[-radius, radius]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cl_mollifier_new(q: usize, radius: f64, out: *mut *mut ClMollifier) -> ClStatus {
    guard(|| {
        let phi = build_moment_mollifier(q, radius)?;
        put(out, Box::into_raw(Box::new(ClMollifier(phi))))
    })
}

/// # Safety
/// `phi` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn cl_mollifier_free(phi: *mut ClMollifier) {
    if !phi.is_null() {
        drop(Box::from_raw(phi));
    }
}

/// `S_ε φ`.
///
/// # Safety
/// `phi` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_mollifier_scale(phi: *const ClMollifier, eps: f64, out: *mut *mut ClMollifier) -> ClStatus {
    guard(|| {
        let s = scale(&ref_arg(phi)?.0, eps)?;
        put(out, Box::into_raw(Box::new(ClMollifier(s))))
    })
}

/// `φ^(order)(t)`.
///
/// # Safety
/// `phi` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_mollifier_eval(phi: *const ClMollifier, t: f64, order: usize, out: *mut f64) -> ClStatus {
    guard(|| {
        let v = ref_arg(phi)?.0.derivative(t, order)?;
        put(out, v)
    })
}

/// `∫ t^j φ(t) dt`.
///
/// # Safety
/// `phi` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_mollifier_moment(phi: *const ClMollifier, j: usize, out: *mut f64) -> ClStatus {
    guard(|| {
        let v = ref_arg(phi)?.0.moment(j, &QuadConfig::precise())?;
        put(out, v)
    })
}

/// `{"q", "radius", "coefficients"}`.
///
/// # Safety
/// `phi` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_mollifier_to_json(phi: *const ClMollifier, out: *mut *mut c_char) -> ClStatus {
    guard(|| {
        let s = serde_json::to_string(&ref_arg(phi)?.0).map_err(|e| Fail(ClStatus::Json, e.to_string()))?;
        put(out, c_string(s)?)
    })
}

/// # Safety
/// `json` must be a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_mollifier_from_json(json: *const c_char, out: *mut *mut ClMollifier) -> ClStatus {
    guard(|| {
        let phi: Mollifier = serde_json::from_str(str_arg(json)?).map_err(|e| Fail(ClStatus::Json, e.to_string()))?;
        put(out, Box::into_raw(Box::new(ClMollifier(phi))))
    })
}

/// Parses an expression on `Ω = (lo, hi)`; infinities are allowed.
///
/// # Safety
/// `text` must be a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_expr_parse(text: *const c_char, lo: f64, hi: f64, out: *mut *mut ClExpr) -> ClStatus {
    guard(|| {
        let ast = parse(str_arg(text)?)?;
        let rep = ast.to_representative(Domain::new(lo, hi)?)?;
        put(out, Box::into_raw(Box::new(ClExpr { text: format(&ast), rep })))
    })
}

/// # Safety
/// `expr` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn cl_expr_free(expr: *mut ClExpr) {
    if !expr.is_null() {
        drop(Box::from_raw(expr));
    }
}

/// Canonical text of the expression.
///
/// # Safety
/// `expr` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_expr_format(expr: *const ClExpr, out: *mut *mut c_char) -> ClStatus {
    guard(|| put(out, c_string(ref_arg(expr)?.text.clone())?))
}

/// `∂^order R(φ, x)`.
///
/// # Safety
/// Handles must be live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_expr_eval(
    expr: *const ClExpr,
    phi: *const ClMollifier,
    x: f64,
    order: usize,
    out: *mut f64,
) -> ClStatus {
    guard(|| {
        let arg = KernelArg::Conv(ref_arg(phi)?.0.clone());
        let v = eval(&ref_arg(expr)?.rep, &arg, x, order)?;
        put(out, v)
    })
}

/// Log-log slope of `ε ↦ ‖R(S_εφ, ·)‖_{K,m}` over `ε = base^(-k)`,
/// `k_min ≤ k ≤ k_max`, sup taken on `grid_points` uniform nodes plus
/// refinement.
///
/// # Safety
/// Handles must be live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_sweep_slope(
    expr: *const ClExpr,
    phi: *const ClMollifier,
    k_lo: f64,
    k_hi: f64,
    m: usize,
    base: f64,
    k_min: u32,
    k_max: u32,
    grid_points: usize,
    out: *mut f64,
) -> ClStatus {
    guard(|| {
        let grid = EpsGrid::new(base, k_min, k_max)?;
        let k = CompactSet::new(k_lo, k_hi)?;
        let cfg = SupConfig::default().with_grid(grid_points);
        let report = sweep_report(&ref_arg(expr)?.rep, &ref_arg(phi)?.0, &k, m, &grid, &cfg)?;
        let slope = report.slope.ok_or(Error::InsufficientSamples { usable: report.used, required: 2 })?;
        put(out, slope)
    })
}

/// Negligibility falsifier with the default family `{sin, x³}` and the
/// grid `ε = √2^(-k)`, `2 ≤ k ≤ 16`. Writes 0 when consistent with
/// negligible, otherwise the refuted degree.
///
/// # Safety
/// `expr` must be a live handle, `out_degree` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_negligibility(
    expr: *const ClExpr,
    k_lo: f64,
    k_hi: f64,
    m: usize,
    c: usize,
    l: usize,
    d_max: usize,
    grid_points: usize,
    out_degree: *mut usize,
) -> ClStatus {
    guard(|| {
        let defaults = RunConfig::default();
        let params = FalsifierParams {
            k: CompactSet::new(k_lo, k_hi)?,
            m,
            c,
            l,
            d_max,
            radius: defaults.radius,
            grid: EpsGrid::new(std::f64::consts::SQRT_2, 2, 16)?,
            family: defaults.family()?,
            eta: defaults.eta,
        };
        let verdict = negligibility_falsifier(&ref_arg(expr)?.rep, &params, &SupConfig::default().with_grid(grid_points))?;
        let degree = match verdict.status {
            NegligibilityStatus::ConsistentWithNegligible => 0,
            NegligibilityStatus::RefutedToDegree { degree } => degree,
        };
        put(out_degree, degree)
    })
}

/// Runs a CLI configuration given as JSON (the `--config` format) and
/// writes the result object. `exit_code` receives the CLI exit code.
///
/// # Safety
/// `config_json` must be a NUL-terminated string, outputs writable.
#[no_mangle]
pub unsafe extern "C" fn cl_run_json(config_json: *const c_char, out: *mut *mut c_char, exit_code: *mut i32) -> ClStatus {
    guard(|| {
        let cfg: RunConfig =
            serde_json::from_str(str_arg(config_json)?).map_err(|e| Fail(ClStatus::Json, e.to_string()))?;
        if out.is_null() || exit_code.is_null() {
            return Err(null());
        }
        let outcome = execute(&cfg)?;
        let s = serde_json::to_string(&outcome.result).map_err(|e| Fail(ClStatus::Json, e.to_string()))?;
        put(out, c_string(s)?)?;
        put(exit_code, outcome.exit_code)
    })
}

