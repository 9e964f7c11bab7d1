//! C ABI for condcop.
//!
//! Every fallible function returns a [`CondcopStatus`] and writes its result
//! through an out pointer. On failure the message is kept per thread and can
//! be read with [`condcop_last_error`]. Fits are opaque [`CondcopFit`]
//! handles released with [`condcop_fit_free`]. `calibration` and `family`
//! arguments take `CondcopCalibration` and `CondcopFamily` values.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use condcop::calibration::conditional_density;
use condcop::copula::{gaussian_copula_cdf, gaussian_copula_density, Correlation, UnitPair};
use condcop::pseudo::PseudoDataset;
use condcop::sampler::{run_chain, ChainTrace, McmcConfig, PriorConfig};
use condcop::synth::{simulate_dataset, CopulaFamily, SimulationPlan};
use condcop::{io, mixture_kendall_tau, predictive_sample, tau_curve, BetaVector, Calibration, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CondcopStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed input: bad length, unknown enum value, out-of-range parameter.
    InvalidArgument = 2,
    /// Probability or correlation outside its domain.
    Domain = 3,
    /// I/O failure or an internal sampler inconsistency.
    Runtime = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CondcopCalibration {
    /// `theta = b1 + b2 x^2`
    Quadratic = 0,
    /// `theta = b1 + b2 x + b3 exp(-b4 x^2)`
    ExpBump = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CondcopFamily {
    Gaussian = 0,
    Frank = 1,
}

/// Sampler and prior settings. Start from [`condcop_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CondcopOptions {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub rw_step: f64,
    /// Dirichlet-process total mass.
    pub lambda: f64,
    /// Prior variance of each coefficient.
    pub sigma2: f64,
    pub adapt: bool,
    pub occupancy_scaled: bool,
    pub label_swaps: bool,
    pub warm_start: usize,
}

/// Posterior draws from one chain.
pub struct CondcopFit {
    trace: ChainTrace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CondcopStatus {
    match e {
        Error::Domain(_) | Error::SingularCorrelation(_) | Error::InvalidCorrelation(_) => CondcopStatus::Domain,
        Error::Consistency(_) | Error::Io(_) | Error::Json(_) => CondcopStatus::Runtime,
        _ => CondcopStatus::InvalidArgument,
    }
}

struct Failure(CondcopStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CondcopStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CondcopStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CondcopStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            CondcopStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn fit_ref<'a>(fit: *const CondcopFit) -> Result<&'a CondcopFit, Failure> {
    fit.as_ref().ok_or_else(|| null("fit"))
}

// Enum arguments arrive as plain integers so an out-of-range value from C
// is reported instead of being undefined behaviour.
fn calibration_arg(c: u32) -> Result<Calibration, Failure> {
    match c {
        c if c == CondcopCalibration::Quadratic as u32 => Ok(Calibration::Quadratic),
        c if c == CondcopCalibration::ExpBump as u32 => Ok(Calibration::ExpBump),
        _ => Err(Failure(CondcopStatus::InvalidArgument, format!("unknown calibration {c}"))),
    }
}

fn family_arg(f: u32) -> Result<CopulaFamily, Failure> {
    match f {
        f if f == CondcopFamily::Gaussian as u32 => Ok(CopulaFamily::Gaussian),
        f if f == CondcopFamily::Frank as u32 => Ok(CopulaFamily::Frank),
        _ => Err(Failure(CondcopStatus::InvalidArgument, format!("unknown copula family {f}"))),
    }
}

fn pair(u: f64, v: f64) -> Result<UnitPair, Failure> {
    Ok(UnitPair::new(u, v)?)
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn condcop_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn condcop_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Gaussian copula density `c(u, v; rho)`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn condcop_copula_density(u: f64, v: f64, rho: f64, out_density: *mut f64) -> CondcopStatus {
    guard(|| {
        let out = out(out_density, "out_density")?;
        *out = gaussian_copula_density(pair(u, v)?, Correlation::new(rho)?)?;
        Ok(())
    })
}

/// Gaussian copula distribution function `C(u, v; rho)`.
///
/// # Safety
/// `out_cdf` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn condcop_copula_cdf(u: f64, v: f64, rho: f64, out_cdf: *mut f64) -> CondcopStatus {
    guard(|| {
        let out = out(out_cdf, "out_cdf")?;
        *out = gaussian_copula_cdf(pair(u, v)?, Correlation::new(rho)?)?;
        Ok(())
    })
}

/// Copula density at `(u, v)` given covariate `x` and coefficients `beta`.
///
/// # Safety
/// `beta` must point to `beta_len` doubles; `out_density` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn condcop_conditional_density(
    u: f64,
    v: f64,
    x: f64,
    calibration: u32,
    beta: *const f64,
    beta_len: usize,
    out_density: *mut f64,
) -> CondcopStatus {
    guard(|| {
        let out = out(out_density, "out_density")?;
        let beta = BetaVector::new(input(beta, beta_len, "beta")?.to_vec())?;
        *out = conditional_density(pair(u, v)?, x, &beta, calibration_arg(calibration)?)?;
        Ok(())
    })
}

/// Kendall's tau of a Gaussian-copula mixture.
///
/// # Safety
/// `weights` and `rhos` must each point to `k` doubles.
#[no_mangle]
pub unsafe extern "C" fn condcop_mixture_tau(weights: *const f64, rhos: *const f64, k: usize, out_tau: *mut f64) -> CondcopStatus {
    guard(|| {
        let out = out(out_tau, "out_tau")?;
        *out = mixture_kendall_tau(input(weights, k, "weights")?, input(rhos, k, "rhos")?)?;
        Ok(())
    })
}

/// Simulates `n` pseudo-observations into the three output arrays. A null
/// `beta` uses the built-in generating coefficients.
///
/// # Safety
/// `beta` must be null or point to `beta_len` doubles; each output must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn condcop_simulate(
    family: u32,
    calibration: u32,
    beta: *const f64,
    beta_len: usize,
    n: usize,
    seed: u64,
    out_u: *mut f64,
    out_v: *mut f64,
    out_x: *mut f64,
) -> CondcopStatus {
    guard(|| {
        let mut plan = SimulationPlan::new(family_arg(family)?, calibration_arg(calibration)?, n, seed);
        if !beta.is_null() {
            plan.truth_beta = BetaVector::new(input(beta, beta_len, "beta")?.to_vec())?;
        }
        let (ou, ov, ox) = (output(out_u, n, "out_u")?, output(out_v, n, "out_v")?, output(out_x, n, "out_x")?);
        let d = simulate_dataset(&plan)?;
        ou.copy_from_slice(&d.u);
        ov.copy_from_slice(&d.v);
        ox.copy_from_slice(&d.x);
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn condcop_options_default() -> CondcopOptions {
    let m = McmcConfig::default();
    let p = PriorConfig::default();
    CondcopOptions {
        iterations: m.iterations,
        burn_in: m.burn_in,
        thin: m.thin,
        seed: m.seed,
        rw_step: m.rw_step,
        lambda: p.total_mass,
        sigma2: p.sigma2,
        adapt: m.adapt,
        occupancy_scaled: m.occupancy_scaled,
        label_swaps: m.label_swaps,
        warm_start: m.warm_start,
    }
}

/// Runs one chain on pseudo-observations `(u, v)` with covariate `x`. A null
/// `options` uses the defaults. On success `*out_fit` owns a new handle.
///
/// # Safety
/// `u`, `v`, `x` must each point to `n` doubles; `out_fit` to a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn condcop_fit(
    u: *const f64,
    v: *const f64,
    x: *const f64,
    n: usize,
    calibration: u32,
    options: *const CondcopOptions,
    out_fit: *mut *mut CondcopFit,
) -> CondcopStatus {
    guard(|| {
        let slot = out(out_fit, "out_fit")?;
        *slot = ptr::null_mut();
        let o = options.as_ref().copied().unwrap_or_else(|| condcop_options_default());
        let data = PseudoDataset::new(
            input(u, n, "u")?.to_vec(),
            input(v, n, "v")?.to_vec(),
            input(x, n, "x")?.to_vec(),
        )?;
        let prior = PriorConfig::new(o.lambda, o.sigma2)?;
        let config = McmcConfig {
            iterations: o.iterations,
            burn_in: o.burn_in,
            thin: o.thin,
            seed: o.seed,
            rw_step: o.rw_step,
            adapt: o.adapt,
            prior_only: false,
            occupancy_scaled: o.occupancy_scaled,
            label_swaps: o.label_swaps,
            warm_start: o.warm_start,
        };
        let trace = run_chain(&data, prior, calibration_arg(calibration)?, config)?;
        *slot = Box::into_raw(Box::new(CondcopFit { trace }));
        Ok(())
    })
}

/// Loads a fit from a trace CSV written by the CLI or [`condcop_fit_write_trace`].
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_fit` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn condcop_fit_load(path: *const c_char, out_fit: *mut *mut CondcopFit) -> CondcopStatus {
    guard(|| {
        let slot = out(out_fit, "out_fit")?;
        *slot = ptr::null_mut();
        let path = path_arg(path)?;
        let trace = io::read_trace_path(Path::new(path))?;
        *slot = Box::into_raw(Box::new(CondcopFit { trace }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `fit` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn condcop_fit_free(fit: *mut CondcopFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Number of kept iterations.
///
/// # Safety
/// `fit` must be a live handle; `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn condcop_fit_len(fit: *const CondcopFit, out_len: *mut usize) -> CondcopStatus {
    guard(|| {
        *out(out_len, "out_len")? = fit_ref(fit)?.trace.len();
        Ok(())
    })
}

/// Post burn-in Metropolis acceptance rate.
///
/// # Safety
/// `fit` must be a live handle; `out_rate` writable.
#[no_mangle]
pub unsafe extern "C" fn condcop_fit_acceptance_rate(fit: *const CondcopFit, out_rate: *mut f64) -> CondcopStatus {
    guard(|| {
        *out(out_rate, "out_rate")? = fit_ref(fit)?.trace.acceptance_rate();
        Ok(())
    })
}

/// Occupied-component count of each kept iteration. `len` must be at least
/// the trace length.
///
/// # Safety
/// `fit` must be a live handle; `out_d_star` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn condcop_fit_d_star(fit: *const CondcopFit, out_d_star: *mut usize, len: usize) -> CondcopStatus {
    guard(|| {
        let trace = &fit_ref(fit)?.trace;
        if len < trace.len() {
            return Err(Failure(
                CondcopStatus::BufferTooSmall,
                format!("buffer holds {len}, trace has {}", trace.len()),
            ));
        }
        let dst = output(out_d_star, trace.len(), "out_d_star")?;
        for (d, r) in dst.iter_mut().zip(&trace.records) {
            *d = r.d_star;
        }
        Ok(())
    })
}

/// Posterior mean and 95% band of Kendall's tau at each of the `m` covariates.
///
/// # Safety
/// `x` must point to `m` doubles and each output must hold `m` doubles.
#[no_mangle]
pub unsafe extern "C" fn condcop_fit_tau_curve(
    fit: *const CondcopFit,
    x: *const f64,
    m: usize,
    out_mean: *mut f64,
    out_lower: *mut f64,
    out_upper: *mut f64,
) -> CondcopStatus {
    guard(|| {
        let fit = fit_ref(fit)?;
        let grid = input(x, m, "x")?;
        let (mean, lower, upper) = (output(out_mean, m, "out_mean")?, output(out_lower, m, "out_lower")?, output(out_upper, m, "out_upper")?);
        let curve = tau_curve(&fit.trace, grid)?;
        mean.copy_from_slice(&curve.mean);
        lower.copy_from_slice(&curve.lower95);
        upper.copy_from_slice(&curve.upper95);
        Ok(())
    })
}

/// One posterior-predictive pair per covariate value.
///
/// # Safety
/// `x` must point to `m` doubles and each output must hold `m` doubles.
#[no_mangle]
pub unsafe extern "C" fn condcop_fit_predictive(
    fit: *const CondcopFit,
    x: *const f64,
    m: usize,
    seed: u64,
    out_u: *mut f64,
    out_v: *mut f64,
) -> CondcopStatus {
    guard(|| {
        let fit = fit_ref(fit)?;
        let xs = input(x, m, "x")?;
        let (ou, ov) = (output(out_u, m, "out_u")?, output(out_v, m, "out_v")?);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (i, d) in predictive_sample(&fit.trace, xs, &mut rng)?.into_iter().enumerate() {
            ou[i] = d.pair.u;
            ov[i] = d.pair.v;
        }
        Ok(())
    })
}

/// Writes the trace in the CLI's CSV layout.
///
/// # Safety
/// `fit` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn condcop_fit_write_trace(fit: *const CondcopFit, path: *const c_char) -> CondcopStatus {
    guard(|| {
        let fit = fit_ref(fit)?;
        let path = path_arg(path)?;
        io::write_trace(io::create(Path::new(path))?, &fit.trace)?;
        Ok(())
    })
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a str, Failure> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map_err(|_| Failure(CondcopStatus::InvalidArgument, "path is not valid UTF-8".into()))
}
