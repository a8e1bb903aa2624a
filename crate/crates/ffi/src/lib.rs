//! C ABI over `ellgreen`.
//!
//! Every fallible call returns an [`EgStatus`]; on failure a message is kept per thread
//! and read back with [`eg_last_error`]. Strings handed out by the library are
//! NUL-terminated, owned by the caller and released with [`eg_string_free`].
//! Handles come from `*_new` / `*_parse` and are released by the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ellgreen::bernoulli::{bernoulli, n2g};
use ellgreen::green::{check_distribution, phi, Method};
use ellgreen::lattice::{LatticeCoord, Tau, TorsionCoord};
use ellgreen::numerics::{decimal, digits_for, PrecisionContext};
use ellgreen::orderbound::ratio_order_refined;
use ellgreen::reckon::{unit_check, UnitOptions, Verdict};
use ellgreen::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EgStatus {
    Ok = 0,
    /// The computation ran but the check it performs did not pass.
    CheckFailed = 1,
    NullPointer = 2,
    InvalidUtf8 = 3,
    InvalidInput = 4,
    ZeroPoint = 5,
    PrecisionTooLow = 6,
    NonConvergent = 7,
    DivergentInput = 8,
    OddInput = 9,
    NotPrime = 10,
    Overflow = 11,
    DependentRows = 12,
    /// A Rust panic was caught at the boundary.
    Panic = 13,
}

/// Evaluation path for [`eg_phi`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EgMethod {
    Sigma = 0,
    Siegel = 1,
    Kronecker = 2,
}

/// Outcome of [`eg_unit_check`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EgVerdict {
    Unit = 0,
    UnitAwayFromN = 1,
    Unrecognized = 2,
}

/// Opaque precision context.
pub struct EgContext(PrecisionContext);

/// Opaque point of the upper half-plane.
pub struct EgTau(Tau);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EgStatus {
    match e {
        Error::NonConvergent(_) => EgStatus::NonConvergent,
        Error::ZeroPoint => EgStatus::ZeroPoint,
        Error::DivergentInput(_) => EgStatus::DivergentInput,
        Error::OddInput(_) => EgStatus::OddInput,
        Error::NotPrime(_) => EgStatus::NotPrime,
        Error::Overflow(_) => EgStatus::Overflow,
        Error::DependentRows => EgStatus::DependentRows,
        Error::PrecisionTooLow { .. } => EgStatus::PrecisionTooLow,
        Error::InvalidInput(_) => EgStatus::InvalidInput,
    }
}

struct Fail(EgStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guarded<F: FnOnce() -> Result<EgStatus, Fail>>(f: F) -> EgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            EgStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(EgStatus::NullPointer, format!("{what} is null")));
    }
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| Fail(EgStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    unsafe { p.as_ref() }.ok_or_else(|| Fail(EgStatus::NullPointer, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(EgStatus::NullPointer, format!("{what} is null")));
    }
    unsafe { out.write(v) };
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String, what: &str) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail(EgStatus::InvalidInput, "interior NUL".into()))?;
    if out.is_null() {
        return Err(Fail(EgStatus::NullPointer, format!("{what} is null")));
    }
    unsafe { out.write(c.into_raw()) };
    Ok(())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn eg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the next failure.
#[no_mangle]
pub extern "C" fn eg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn eg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// New precision context of `bits` target bits plus `guard` guard bits (`bits >= 64`).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eg_context_new(bits: u32, guard: u32, out: *mut *mut EgContext) -> EgStatus {
    guarded(|| {
        let ctx = PrecisionContext::new(bits, guard)?;
        unsafe { put(out, Box::into_raw(Box::new(EgContext(ctx))), "out") }?;
        Ok(EgStatus::Ok)
    })
}

/// # Safety
/// `ctx` must come from [`eg_context_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn eg_context_free(ctx: *mut EgContext) {
    if !ctx.is_null() {
        drop(unsafe { Box::from_raw(ctx) });
    }
}

/// Target precision of a context, 0 for null.
///
/// # Safety
/// `ctx` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eg_context_bits(ctx: *const EgContext) -> u32 {
    unsafe { ctx.as_ref() }.map_or(0, |c| c.0.bits())
}

/// Parses `"re,im"` with rational or decimal parts, or one of the presets `i`, `2i`, `rho`.
///
/// # Safety
/// `text` must be a NUL-terminated string, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eg_tau_parse(text: *const c_char, out: *mut *mut EgTau) -> EgStatus {
    guarded(|| {
        let tau = Tau::parse(unsafe { str_arg(text, "text") }?)?;
        unsafe { put(out, Box::into_raw(Box::new(EgTau(tau))), "out") }?;
        Ok(EgStatus::Ok)
    })
}

/// # Safety
/// `tau` must come from [`eg_tau_parse`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn eg_tau_free(tau: *mut EgTau) {
    if !tau.is_null() {
        drop(unsafe { Box::from_raw(tau) });
    }
}

/// Green function at `z = "a1,a2"` (exact rationals). Writes a decimal string with all
/// trusted digits to `out_decimal` and, if `out_approx` is not null, a double.
///
/// # Safety
/// Handles must be live, `z` NUL-terminated, `out_decimal` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eg_phi(
    ctx: *const EgContext,
    tau: *const EgTau,
    z: *const c_char,
    method: EgMethod,
    out_approx: *mut f64,
    out_decimal: *mut *mut c_char,
) -> EgStatus {
    guarded(|| {
        let ctx = unsafe { handle(ctx, "ctx") }?;
        let tau = unsafe { handle(tau, "tau") }?;
        let z = LatticeCoord::parse(unsafe { str_arg(z, "z") }?)?;
        let m = match method {
            EgMethod::Sigma => Method::Sigma,
            EgMethod::Siegel => Method::Siegel,
            EgMethod::Kronecker => Method::Kronecker,
        };
        let v = phi(m, &z, &tau.0, &ctx.0)?;
        unsafe { put_string(out_decimal, decimal(&v.value, digits_for(&ctx.0)), "out_decimal") }?;
        if !out_approx.is_null() {
            unsafe { out_approx.write(v.value.to_f64()) };
        }
        Ok(EgStatus::Ok)
    })
}

/// Distribution relation at `z` for multiplier `n`. Returns `Ok` when it holds,
/// `CheckFailed` when it does not; `out_json` (optional) receives the report.
///
/// # Safety
/// Handles must be live, `z` NUL-terminated, `out_json` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eg_check_distribution(ctx: *const EgContext, tau: *const EgTau, z: *const c_char, n: u64, out_json: *mut *mut c_char) -> EgStatus {
    guarded(|| {
        let ctx = unsafe { handle(ctx, "ctx") }?;
        let tau = unsafe { handle(tau, "tau") }?;
        let z = LatticeCoord::parse(unsafe { str_arg(z, "z") }?)?;
        let r = check_distribution(&z, n, &tau.0, &ctx.0)?;
        if !out_json.is_null() {
            unsafe { put_string(out_json, r.to_json("check").to_string(), "out_json") }?;
        }
        Ok(if r.passed() { EgStatus::Ok } else { EgStatus::CheckFailed })
    })
}

/// `N_2g` as a decimal integer string.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eg_n2g(g: u64, out: *mut *mut c_char) -> EgStatus {
    guarded(|| {
        unsafe { put_string(out, n2g(g)?.to_string(), "out") }?;
        Ok(EgStatus::Ok)
    })
}

/// Bernoulli number `B_t` (`B_1 = -1/2`) as `"p/q"` or an integer; `t <= 1000`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eg_bernoulli(t: u32, out: *mut *mut c_char) -> EgStatus {
    guarded(|| {
        if t > 1000 {
            return Err(Fail(EgStatus::InvalidInput, format!("index {t} exceeds 1000")));
        }
        unsafe { put_string(out, bernoulli(t as usize).to_string(), "out") }?;
        Ok(EgStatus::Ok)
    })
}

/// Refined and coarse bounds on the order of `x -> x^c` on the ratio sets for `n`.
///
/// # Safety
/// Both out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eg_ratio_order_bound(n: u64, c: u64, out_refined: *mut *mut c_char, out_coarse: *mut *mut c_char) -> EgStatus {
    guarded(|| {
        let b = ratio_order_refined(n, c)?;
        if out_refined.is_null() || out_coarse.is_null() {
            return Err(Fail(EgStatus::NullPointer, "output pointer is null".into()));
        }
        unsafe { put_string(out_refined, b.refined.to_string(), "out_refined") }?;
        unsafe { put_string(out_coarse, b.coarse.to_string(), "out_coarse") }?;
        Ok(EgStatus::Ok)
    })
}

/// Recognizes `exp(24 n phi)` at the torsion point `(p1/q, p2/q)` (context of at least 512 bits),
/// replicating at twice the precision. `out_polynomial` (optional) receives the minimal
/// polynomial or an empty string when nothing was recognized.
///
/// # Safety
/// Handles must be live; `out_verdict` valid for writes; `out_polynomial` null or valid.
#[no_mangle]
pub unsafe extern "C" fn eg_unit_check(
    ctx: *const EgContext,
    tau: *const EgTau,
    p1: i64,
    p2: i64,
    q: u64,
    maxdeg: u32,
    out_verdict: *mut EgVerdict,
    out_polynomial: *mut *mut c_char,
) -> EgStatus {
    guarded(|| {
        let ctx = unsafe { handle(ctx, "ctx") }?;
        let tau = unsafe { handle(tau, "tau") }?;
        let t = TorsionCoord::new(p1, p2, q)?;
        let r = unit_check(&tau.0, &t, maxdeg as usize, &UnitOptions::default(), &ctx.0)?;
        let v = match r.verdict {
            Verdict::Unit => EgVerdict::Unit,
            Verdict::UnitAwayFromN => EgVerdict::UnitAwayFromN,
            Verdict::Unrecognized => EgVerdict::Unrecognized,
        };
        unsafe { put(out_verdict, v, "out_verdict") }?;
        if !out_polynomial.is_null() {
            let poly = r.polynomial.map(|p| p.to_string()).unwrap_or_default();
            unsafe { put_string(out_polynomial, poly, "out_polynomial") }?;
        }
        Ok(EgStatus::Ok)
    })
}
