//! C ABI for `orthoglass`.
//!
//! Objects cross the boundary as opaque handles created by `og_*_new` and
//! released by the matching `og_*_free`. Every fallible call returns an
//! [`OgStatus`] and writes its result through an out-pointer; after a failure
//! `og_last_error_message` describes it. Panics are caught and reported as
//! `OG_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use orthoglass::models::ModelSpec;
use orthoglass::montecarlo::{exact_log_partition, HaarSample};
use orthoglass::spectral::{SpectralMeasure, TransformProfile};
use orthoglass::variational::{
    maximize_psi, solve_fixed_point, Classification, RateFunction, VariationalSolution,
};
use orthoglass::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OgStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    NoConvergence = 3,
    Dimension = 4,
    CapExceeded = 5,
    InvalidArgument = 6,
    NoTransition = 7,
    Panic = 8,
}

/// A spectral measure with its transform evaluators.
pub struct OgProfile(TransformProfile);

/// The rate function `T_μ` of a profile.
pub struct OgRateFunction(RateFunction);

/// A two-replica stationary point. `hessian` is row-major; `classification`
/// is 0 local max, 1 saddle, 2 indefinite.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OgSolution {
    pub x_star: f64,
    pub y_star: f64,
    pub psi: f64,
    pub hessian: [f64; 4],
    pub classification: i32,
    pub iterations: usize,
    pub converged: bool,
}

impl From<&VariationalSolution> for OgSolution {
    fn from(s: &VariationalSolution) -> Self {
        OgSolution {
            x_star: s.x_star,
            y_star: s.y_star,
            psi: s.psi_value,
            hessian: [
                s.hessian[0][0],
                s.hessian[0][1],
                s.hessian[1][0],
                s.hessian[1][1],
            ],
            classification: match s.classification {
                Classification::LocalMax => 0,
                Classification::Saddle => 1,
                Classification::Indefinite => 2,
            },
            iterations: s.iterations,
            converged: s.converged,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> OgStatus {
    match e {
        Error::Domain(_) => OgStatus::Domain,
        Error::NoConvergence(_) => OgStatus::NoConvergence,
        Error::Dimension(_) => OgStatus::Dimension,
        Error::CapExceeded { .. } => OgStatus::CapExceeded,
        Error::InvalidMeasure(_) | Error::InvalidModel(_) => OgStatus::InvalidArgument,
        Error::NoTransition { .. } => OgStatus::NoTransition,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (OgStatus, String)>>(f: F) -> OgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside orthoglass");
            OgStatus::Panic
        }
    }
}

fn lift<T>(r: orthoglass::Result<T>) -> Result<T, (OgStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (OgStatus, String) {
    (OgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), (OgStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    // SAFETY: non-null and, per the API contract, valid for writes.
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn new_profile(
    measure: orthoglass::Result<SpectralMeasure>,
    out: *mut *mut OgProfile,
) -> OgStatus {
    guard(|| {
        let m = lift(measure)?;
        unsafe {
            write(
                out,
                Box::into_raw(Box::new(OgProfile(TransformProfile::new(m)))),
            )
        }
    })
}

/// Message for the most recent failure on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn og_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn og_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn og_profile_new_semicircle(out: *mut *mut OgProfile) -> OgStatus {
    unsafe { new_profile(Ok(SpectralMeasure::semicircle()), out) }
}

/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn og_profile_new_two_point(p: f64, out: *mut *mut OgProfile) -> OgStatus {
    unsafe { new_profile(SpectralMeasure::two_point(p), out) }
}

/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn og_profile_new_marchenko_pastur(
    lambda: f64,
    out: *mut *mut OgProfile,
) -> OgStatus {
    unsafe { new_profile(SpectralMeasure::marchenko_pastur(lambda), out) }
}

/// Discrete measure with atoms `values[i]` of mass `weights[i]`.
///
/// # Safety
/// `values` and `weights` must point to `len` readable doubles; `out` must be
/// valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn og_profile_new_discrete(
    values: *const f64,
    weights: *const f64,
    len: usize,
    out: *mut *mut OgProfile,
) -> OgStatus {
    if values.is_null() || weights.is_null() {
        set_error("values or weights is null");
        return OgStatus::NullPointer;
    }
    // SAFETY: caller guarantees `len` readable elements.
    let (v, w) = unsafe {
        (
            std::slice::from_raw_parts(values, len),
            std::slice::from_raw_parts(weights, len),
        )
    };
    let atoms = v.iter().copied().zip(w.iter().copied()).collect();
    unsafe { new_profile(SpectralMeasure::discrete(atoms), out) }
}

/// Limiting-measure profile of a model given as JSON, e.g. `{"kind":"rom","p":0.5}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn og_profile_from_model_json(
    json: *const c_char,
    out: *mut *mut OgProfile,
) -> OgStatus {
    if json.is_null() {
        set_error("json is null");
        return OgStatus::NullPointer;
    }
    // SAFETY: caller guarantees a NUL-terminated string.
    let text = unsafe { CStr::from_ptr(json) }
        .to_string_lossy()
        .into_owned();
    unsafe {
        new_profile(
            ModelSpec::from_json(&text).map(|m| m.limiting_measure()),
            out,
        )
    }
}

/// # Safety
/// `profile` must come from an `og_profile_new_*` call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn og_profile_free(profile: *mut OgProfile) {
    if !profile.is_null() {
        // SAFETY: created by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(profile) });
    }
}

unsafe fn with_profile<F>(profile: *const OgProfile, out: *mut f64, f: F) -> OgStatus
where
    F: FnOnce(&TransformProfile) -> orthoglass::Result<f64>,
{
    guard(|| {
        // SAFETY: a live handle from og_profile_new_* or null.
        let p = unsafe { profile.as_ref() }.ok_or_else(|| null("profile"))?;
        let v = lift(f(&p.0))?;
        unsafe { write(out, v) }
    })
}

/// # Safety
/// `profile` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn og_profile_hilbert(
    profile: *const OgProfile,
    z: f64,
    out: *mut f64,
) -> OgStatus {
    unsafe { with_profile(profile, out, |p| p.hilbert(z)) }
}

/// # Safety
/// `profile` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn og_profile_r_transform(
    profile: *const OgProfile,
    z: f64,
    out: *mut f64,
) -> OgStatus {
    unsafe { with_profile(profile, out, |p| p.r_transform(z)) }
}

/// # Safety
/// `profile` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn og_profile_q_transform(
    profile: *const OgProfile,
    x: f64,
    out: *mut f64,
) -> OgStatus {
    unsafe { with_profile(profile, out, |p| p.q_transform(x)) }
}

/// `I_μ(β)`.
///
/// # Safety
/// `profile` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn og_profile_free_energy_limit(
    profile: *const OgProfile,
    beta: f64,
    out: *mut f64,
) -> OgStatus {
    unsafe { with_profile(profile, out, |p| p.free_energy_limit(beta)) }
}

/// Rate function of a profile; the profile handle may be freed afterwards.
///
/// # Safety
/// `profile` must be a live handle; `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn og_rate_function_new(
    profile: *const OgProfile,
    out: *mut *mut OgRateFunction,
) -> OgStatus {
    guard(|| {
        let p = unsafe { profile.as_ref() }.ok_or_else(|| null("profile"))?;
        let rf = Box::into_raw(Box::new(OgRateFunction(RateFunction::new(p.0.clone()))));
        unsafe { write(out, rf) }.inspect_err(|_| drop(unsafe { Box::from_raw(rf) }))
    })
}

/// # Safety
/// `rf` must come from `og_rate_function_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn og_rate_function_free(rf: *mut OgRateFunction) {
    if !rf.is_null() {
        drop(unsafe { Box::from_raw(rf) });
    }
}

/// `T_μ(x)`; `+∞` outside the support.
///
/// # Safety
/// `rf` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn og_rate_function_value(
    rf: *const OgRateFunction,
    x: f64,
    out: *mut f64,
) -> OgStatus {
    guard(|| {
        let r = unsafe { rf.as_ref() }.ok_or_else(|| null("rate function"))?;
        unsafe { write(out, r.0.value(x)) }
    })
}

/// `ψ(x, y)`; `-∞` outside the support square.
///
/// # Safety
/// `rf` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn og_psi(
    rf: *const OgRateFunction,
    beta: f64,
    x: f64,
    y: f64,
    out: *mut f64,
) -> OgStatus {
    guard(|| {
        let r = unsafe { rf.as_ref() }.ok_or_else(|| null("rate function"))?;
        unsafe { write(out, r.0.psi(beta, x, y)) }
    })
}

/// # Safety
/// `rf` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn og_solve_fixed_point(
    rf: *const OgRateFunction,
    beta: f64,
    out: *mut OgSolution,
) -> OgStatus {
    guard(|| {
        let r = unsafe { rf.as_ref() }.ok_or_else(|| null("rate function"))?;
        let s = lift(solve_fixed_point(&r.0, beta))?;
        unsafe { write(out, OgSolution::from(&s)) }
    })
}

/// # Safety
/// `rf` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn og_maximize_psi(
    rf: *const OgRateFunction,
    beta: f64,
    out: *mut OgSolution,
) -> OgStatus {
    guard(|| {
        let r = unsafe { rf.as_ref() }.ok_or_else(|| null("rate function"))?;
        let s = lift(maximize_psi(&r.0, beta))?;
        unsafe { write(out, OgSolution::from(&s)) }
    })
}

/// `Φ_N` by exhaustive enumeration for `J = O diag(d) Oᵀ`, with `o` the
/// `n × n` orthogonal matrix in row-major order. `n ≤ 24`.
///
/// # Safety
/// `d` must point to `n` doubles, `o` to `n*n` doubles; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn og_exact_log_partition(
    d: *const f64,
    o: *const f64,
    n: usize,
    beta: f64,
    out: *mut f64,
) -> OgStatus {
    guard(|| {
        if d.is_null() || o.is_null() {
            return Err(null("d or o"));
        }
        let len = n
            .checked_mul(n)
            .ok_or_else(|| (OgStatus::Dimension, format!("n = {n} overflows")))?;
        // SAFETY: caller guarantees the lengths.
        let (dv, ov) = unsafe {
            (
                std::slice::from_raw_parts(d, n),
                std::slice::from_raw_parts(o, len),
            )
        };
        let sample = lift(HaarSample::from_row_major(n, ov))?;
        let v = lift(exact_log_partition(dv, &sample, beta))?;
        unsafe { write(out, v) }
    })
}
