//! C ABI over `rcqme`.
//!
//! Every function returns an [`RcqmeStatus`]; on failure a description is
//! available from [`rcqme_last_error`] on the same thread. Models are opaque
//! handles created by [`rcqme_model_new`] and released by
//! [`rcqme_model_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rcqme::bath::BathSpec;
use rcqme::hamiltonian::{converge_effective, JunctionModel};
use rcqme::methods::{evaluate, rectification, Method, DEFAULT_M_MAX, DEFAULT_TOL};
use rcqme::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcqmeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Domain = 3,
    Resource = 4,
    Numerical = 5,
    UndefinedRatio = 6,
    Config = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcqmeMethod {
    /// Reaction-coordinate master equation; needs `m >= 1` levels per mode.
    RcQme = 0,
    /// Bare spin with the Brownian spectral densities.
    Bmr = 1,
    /// Effective spin-boson model, default tolerance and level cap.
    EffSb = 2,
}

/// Parameters of one bath, all in units of the reference splitting.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcqmeBath {
    pub lambda: f64,
    pub omega_rc: f64,
    pub gamma: f64,
    pub cutoff: f64,
    pub temperature: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcqmeEffective {
    pub delta_eff: f64,
    pub f_hot: f64,
    pub f_cold: f64,
    pub m_used: usize,
    pub converged: bool,
    pub ill_conditioned: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcqmeRectification {
    pub current_forward: f64,
    pub current_reverse: f64,
    pub ratio: f64,
}

/// Opaque junction model.
pub struct RcqmeModel {
    inner: JunctionModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RcqmeStatus {
    match e {
        Error::InvalidParameter { .. } => RcqmeStatus::InvalidParameter,
        Error::Domain(_) => RcqmeStatus::Domain,
        Error::Resource(_) => RcqmeStatus::Resource,
        Error::UndefinedRatio { .. } => RcqmeStatus::UndefinedRatio,
        Error::Config(_) | Error::Io(_) => RcqmeStatus::Config,
        Error::Eigensolver { .. }
        | Error::Svd(_)
        | Error::DegenerateSteadyState { .. }
        | Error::Quadrature { .. }
        | Error::Fit(_) => RcqmeStatus::Numerical,
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RcqmeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RcqmeStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer passed as `{name}`"));
            RcqmeStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            RcqmeStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn get_mut<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(name))
}

fn bath_spec(b: &RcqmeBath) -> rcqme::Result<BathSpec> {
    BathSpec::new(b.lambda, b.omega_rc, b.gamma, b.cutoff, b.temperature)
}

/// `kind` arrives as a plain integer so that out-of-range values from C are
/// rejected instead of becoming invalid enum values.
fn method(kind: u32, m: usize) -> Result<Method, Failure> {
    match kind {
        k if k == RcqmeMethod::RcQme as u32 => Ok(Method::RcQme(m)),
        k if k == RcqmeMethod::Bmr as u32 => Ok(Method::Bmr),
        k if k == RcqmeMethod::EffSb as u32 => Ok(Method::effsb()),
        k => Err(Error::Domain(format!("unknown method code {k}")).into()),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rcqme_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rcqme_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a model. On success `*out` owns a handle that must be released
/// with `rcqme_model_free`.
///
/// # Safety
/// `hot`, `cold` and `out` must be valid pointers or NULL.
#[no_mangle]
pub unsafe extern "C" fn rcqme_model_new(
    epsilon: f64,
    delta: f64,
    hot: *const RcqmeBath,
    cold: *const RcqmeBath,
    out: *mut *mut RcqmeModel,
) -> RcqmeStatus {
    guard(|| {
        let out = get_mut(out, "out")?;
        *out = ptr::null_mut();
        let hot = bath_spec(get(hot, "hot")?)?;
        let cold = bath_spec(get(cold, "cold")?)?;
        let inner = JunctionModel::new(epsilon, delta, hot, cold)?;
        *out = Box::into_raw(Box::new(RcqmeModel { inner }));
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `model` must come from `rcqme_model_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rcqme_model_free(model: *mut RcqmeModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Sets both coupling strengths. The model is unchanged on failure.
///
/// # Safety
/// `model` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn rcqme_model_set_couplings(model: *mut RcqmeModel, lambda_hot: f64, lambda_cold: f64) -> RcqmeStatus {
    guard(|| {
        let model = get_mut(model, "model")?;
        let next = model.inner.with_couplings(lambda_hot, lambda_cold);
        next.validate()?;
        model.inner = next;
        Ok(())
    })
}

/// Sets both bath temperatures. The model is unchanged on failure.
///
/// # Safety
/// `model` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn rcqme_model_set_temperatures(model: *mut RcqmeModel, t_hot: f64, t_cold: f64) -> RcqmeStatus {
    guard(|| {
        let model = get_mut(model, "model")?;
        let next = model.inner.with_temperatures(t_hot, t_cold);
        next.validate()?;
        model.inner = next;
        Ok(())
    })
}

/// Steady-state heat current out of the hot bath, in units of the squared
/// reference splitting. `kind` is an `RcqmeMethod` value; `m` is the number
/// of levels per reaction coordinate and is ignored by the other methods.
///
/// # Safety
/// `model` and `out` must be valid pointers or NULL.
#[no_mangle]
pub unsafe extern "C" fn rcqme_current(
    model: *const RcqmeModel,
    kind: u32,
    m: usize,
    out: *mut f64,
) -> RcqmeStatus {
    guard(|| {
        let model = get(model, "model")?;
        let out = get_mut(out, "out")?;
        *out = evaluate(&model.inner, method(kind, m)?)?.current;
        Ok(())
    })
}

/// Effective splitting and couplings, increasing the level count until the
/// relative change drops below `tol` or `m_max` is reached. Non-positive
/// `tol` or zero `m_max` select the library defaults.
///
/// # Safety
/// `model` and `out` must be valid pointers or NULL.
#[no_mangle]
pub unsafe extern "C" fn rcqme_effective_params(
    model: *const RcqmeModel,
    tol: f64,
    m_max: usize,
    out: *mut RcqmeEffective,
) -> RcqmeStatus {
    guard(|| {
        let model = get(model, "model")?;
        let out = get_mut(out, "out")?;
        let tol = if tol > 0.0 { tol } else { DEFAULT_TOL };
        let m_max = if m_max == 0 { DEFAULT_M_MAX } else { m_max };
        let e = converge_effective(&model.inner, tol, m_max)?;
        *out = RcqmeEffective {
            delta_eff: e.delta_eff,
            f_hot: e.f_hot,
            f_cold: e.f_cold,
            m_used: e.m_used,
            converged: e.converged,
            ill_conditioned: e.ill_conditioned,
        };
        Ok(())
    })
}

/// Forward and reverse currents for `lambda_hot = lambda_mean (1 - chi)`,
/// `lambda_cold = lambda_mean (1 + chi)`, and their ratio. `kind` and `m`
/// are as in `rcqme_current`.
///
/// # Safety
/// `model` and `out` must be valid pointers or NULL.
#[no_mangle]
pub unsafe extern "C" fn rcqme_rectification(
    model: *const RcqmeModel,
    lambda_mean: f64,
    chi: f64,
    kind: u32,
    m: usize,
    out: *mut RcqmeRectification,
) -> RcqmeStatus {
    guard(|| {
        let model = get(model, "model")?;
        let out = get_mut(out, "out")?;
        let r = rectification(&model.inner, lambda_mean, chi, method(kind, m)?)?;
        *out = RcqmeRectification {
            current_forward: r.current_forward,
            current_reverse: r.current_reverse,
            ratio: r.ratio,
        };
        Ok(())
    })
}
