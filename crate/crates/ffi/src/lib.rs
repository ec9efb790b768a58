//! C ABI over `shc-core`.
//!
//! Models and domains are opaque handles created by `shc_*_new` style
//! constructors and released with the matching `_free`. Every fallible call
//! returns an [`ShcStatus`]; on failure the message is available from
//! [`shc_last_error`] until the next failing call on the same thread.

use shc_core::estimators::{
    exit_probability_ball, heat_content_deficit, perimeter, sup_functional, DeficitStrategy, Estimate, PerimeterBudget,
    PerimeterMethod, SimSettings,
};
use shc_core::geometry::Domain;
use shc_core::harness::{run_dichotomy, to_json, ExperimentConfig, ModelSpec};
use shc_core::levy_models::LevyModel;
use shc_core::ShcError;
use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidModel = 3,
    Config = 4,
    Numeric = 5,
    Precondition = 6,
    DivergentPerimeter = 7,
    Io = 8,
    Panic = 9,
}

/// Opaque Lévy model handle.
pub struct ShcModel(LevyModel);

/// Opaque domain handle.
pub struct ShcDomain(Domain);

/// Monte Carlo or quadrature result.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ShcEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl From<Estimate> for ShcEstimate {
    fn from(e: Estimate) -> Self {
        Self { value: e.value, std_error: e.stderr, n_samples: e.n_samples, seed: e.seed }
    }
}

/// Path simulation settings; zero `steps` selects the default of 256.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ShcSimOptions {
    pub n_paths: u64,
    pub steps: u32,
    pub seed: u64,
    pub antithetic: bool,
}

impl ShcSimOptions {
    fn settings(&self) -> SimSettings {
        let steps = if self.steps == 0 { 256 } else { self.steps as usize };
        SimSettings { steps, antithetic: self.antithetic, seed: self.seed, ..SimSettings::default() }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &ShcError) -> ShcStatus {
    match e {
        ShcError::InvalidArgument(_) | ShcError::InvalidCutoff(_) | ShcError::OutOfRange(_) | ShcError::Bracket { .. } => {
            ShcStatus::InvalidArgument
        }
        ShcError::InvalidProfile(_) | ShcError::InvalidModel(_) | ShcError::DegenerateScale(_) => ShcStatus::InvalidModel,
        ShcError::Config(_) => ShcStatus::Config,
        ShcError::Numeric { .. } | ShcError::Quality(_) | ShcError::NonUniqueProjection { .. } => ShcStatus::Numeric,
        ShcError::Precondition(_)
        | ShcError::UnboundedDomain
        | ShcError::IndeterminateClassification(_)
        | ShcError::ClassificationConflict { .. } => ShcStatus::Precondition,
        ShcError::DivergentPerimeter => ShcStatus::DivergentPerimeter,
        ShcError::Io(_) => ShcStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), ShcStatus>) -> ShcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ShcStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside shc");
            ShcStatus::Panic
        }
    }
}

fn fail(e: ShcError) -> ShcStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> ShcStatus {
    set_error(&format!("{what} is null"));
    ShcStatus::NullPointer
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, ShcStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(ShcError::InvalidArgument(format!("{what} is not UTF-8"))))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, ShcStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, ShcStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn shc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failing call on this thread. Valid until the next
/// failing call; never null.
#[no_mangle]
pub extern "C" fn shc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Brownian motion with identity diffusion matrix.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn shc_model_brownian(dim: usize, out: *mut *mut ShcModel) -> ShcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = boxed(ShcModel(LevyModel::brownian(dim).map_err(fail)?));
        Ok(())
    })
}

/// Isotropic β-stable process, 0 < β < 2.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn shc_model_stable(dim: usize, beta: f64, out: *mut *mut ShcModel) -> ShcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = boxed(ShcModel(LevyModel::stable(dim, beta).map_err(fail)?));
        Ok(())
    })
}

/// Model from a TOML table with the same keys as the `[model]` section of an
/// experiment config, e.g. `preset = "truncated-stable"\nbeta = 0.5`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shc_model_from_toml(spec: *const c_char, out: *mut *mut ShcModel) -> ShcStatus {
    guard(|| {
        let text = str_arg(spec, "spec")?;
        let out = out_arg(out, "out")?;
        let spec: ModelSpec = toml::from_str(text).map_err(|e| fail(ShcError::Config(e.to_string())))?;
        *out = boxed(ShcModel(spec.build().map_err(fail)?));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from a `shc_model_*` constructor that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn shc_model_free(model: *mut ShcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn shc_model_dim(model: *const ShcModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.dim())
}

/// 1 for unbounded variation, 0 for bounded variation, -1 on error.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn shc_model_unbounded_variation(model: *const ShcModel) -> c_int {
    let mut r = -1;
    let s = guard(|| {
        let m = ref_arg(model, "model")?;
        let c = shc_core::scale_kernel::classify_variation(&m.0, None).map_err(fail)?;
        r = (c.kind == shc_core::scale_kernel::Variation::UnboundedVariation) as c_int;
        Ok(())
    });
    if s == ShcStatus::Ok {
        r
    } else {
        -1
    }
}

/// Scale function φ(r).
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn shc_scale_function(model: *const ShcModel, r: f64, out: *mut f64) -> ShcStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        let out = out_arg(out, "out")?;
        *out = m.0.scale_function().and_then(|sf| sf.eval(r)).map_err(fail)?;
        Ok(())
    })
}

/// Ball B(center, radius); `center` may be null for the origin.
///
/// # Safety
/// `center` must be null or point to `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shc_domain_ball(dim: usize, center: *const f64, radius: f64, out: *mut *mut ShcDomain) -> ShcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let c = if center.is_null() { vec![0.0; dim] } else { std::slice::from_raw_parts(center, dim).to_vec() };
        *out = boxed(ShcDomain(Domain::ball(c, radius).map_err(fail)?));
        Ok(())
    })
}

/// # Safety
/// `domain` must be null or a live handle from [`shc_domain_ball`].
#[no_mangle]
pub unsafe extern "C" fn shc_domain_free(domain: *mut ShcDomain) {
    if !domain.is_null() {
        drop(Box::from_raw(domain));
    }
}

/// E[sup_{s≤t} ⟨X_s, ν⟩ ∧ b].
///
/// # Safety
/// `model` must be a live handle, `nu` must point to `dim` doubles and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn shc_sup_functional(
    model: *const ShcModel,
    nu: *const f64,
    t: f64,
    b: f64,
    opts: ShcSimOptions,
    out: *mut ShcEstimate,
) -> ShcStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        ref_arg(nu, "nu")?;
        let out = out_arg(out, "out")?;
        let nu = std::slice::from_raw_parts(nu, m.0.dim());
        *out = sup_functional(&m.0, nu, t, b, opts.n_paths, &opts.settings()).map_err(fail)?.into();
        Ok(())
    })
}

/// P(τ_{B(0,r)} ≤ t).
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn shc_exit_probability_ball(
    model: *const ShcModel,
    r: f64,
    t: f64,
    opts: ShcSimOptions,
    out: *mut ShcEstimate,
) -> ShcStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        let out = out_arg(out, "out")?;
        *out = exit_probability_ball(&m.0, r, t, opts.n_paths, &opts.settings()).map_err(fail)?.into();
        Ok(())
    })
}

/// |D| − Q_D(t), integrating over the whole domain.
///
/// # Safety
/// `model` and `domain` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn shc_heat_content_deficit(
    model: *const ShcModel,
    domain: *const ShcDomain,
    t: f64,
    opts: ShcSimOptions,
    out: *mut ShcEstimate,
) -> ShcStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        let d = ref_arg(domain, "domain")?;
        let out = out_arg(out, "out")?;
        let e = heat_content_deficit(&m.0, &d.0, t, opts.n_paths, DeficitStrategy::UniformDomain, &opts.settings())
            .map_err(fail)?;
        *out = e.estimate.into();
        Ok(())
    })
}

/// Per_X(D) by deterministic quadrature. Fails with
/// `DivergentPerimeter` for unbounded-variation models.
///
/// # Safety
/// `model` and `domain` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn shc_perimeter(model: *const ShcModel, domain: *const ShcDomain, out: *mut ShcEstimate) -> ShcStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        let d = ref_arg(domain, "domain")?;
        let out = out_arg(out, "out")?;
        let rep = perimeter(&m.0, &d.0, PerimeterMethod::Quadrature, &PerimeterBudget::default()).map_err(fail)?;
        *out = rep.estimate.into();
        Ok(())
    })
}

/// Runs a dichotomy experiment from TOML config text. On success `json_out`
/// receives the report (free with [`shc_string_free`]) and `outcome` the
/// verdict: 0 pass, 2 fail, 3 inconclusive.
///
/// # Safety
/// `config` must be NUL-terminated; `json_out` and `outcome` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shc_run_dichotomy(config: *const c_char, json_out: *mut *mut c_char, outcome: *mut c_int) -> ShcStatus {
    guard(|| {
        let text = str_arg(config, "config")?;
        let json_out = out_arg(json_out, "json_out")?;
        let outcome = out_arg(outcome, "outcome")?;
        let mut cfg = ExperimentConfig::from_toml(text).map_err(fail)?;
        cfg.apply_env().map_err(fail)?;
        let rep = run_dichotomy(&cfg).map_err(fail)?;
        let json = to_json(&rep).map_err(fail)?;
        *json_out = CString::new(json).map_err(|e| fail(ShcError::Config(e.to_string())))?.into_raw();
        *outcome = rep.outcome.exit_code();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn shc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
