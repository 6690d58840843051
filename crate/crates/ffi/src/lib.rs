//! C interface to the rough heat equation solvers.
//!
//! Drivers and trajectories are opaque handles created by `rh_*` constructors
//! and released with the matching `*_free`. Every fallible call returns an
//! [`RhStatus`]; on failure [`rh_last_error`] describes what went wrong on the
//! calling thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use rough_heat::driver::FbmSampler;
use rough_heat::schemes::{default_initial_condition, run};
use rough_heat::{
    sobolev_norm, weight1, weight2, DriverPath, Error, Nonlinearity, Scheme, SchemeConfig,
    SpectralState, Trajectory,
};

#[allow(non_camel_case_types)]
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhStatus {
    RH_OK = 0,
    RH_NULL_POINTER = 1,
    RH_INVALID_ARGUMENT = 2,
    RH_CONFIG_ERROR = 3,
    RH_BLOW_UP = 4,
    RH_IO_ERROR = 5,
    RH_PANIC = 6,
}

#[allow(non_camel_case_types)]
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhScheme {
    RH_EULER = 0,
    RH_MILSTEIN = 1,
}

/// Parameters of one solver run. Start from [`rh_sim_params_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct RhSimParams {
    pub scheme: RhScheme,
    /// Euler: number of steps. Milstein: dyadic exponent.
    pub time_mesh: usize,
    pub modes: usize,
    pub hurst: f64,
    pub kappa: f64,
    /// Strength of `f_k(x) = k(1 - x)/(1 + x^2)`.
    pub k: f64,
    pub components: usize,
    pub seed: u64,
    pub oversample: usize,
}

/// Sampled driver path.
pub struct RhDriver(DriverPath);

/// Solver output.
pub struct RhTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RhStatus {
    match e {
        Error::InvalidArgument(_) | Error::DegenerateFit(_) => RhStatus::RH_INVALID_ARGUMENT,
        Error::Config(_) => RhStatus::RH_CONFIG_ERROR,
        Error::NonFinite { .. } | Error::Embedding(_) => RhStatus::RH_BLOW_UP,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => RhStatus::RH_IO_ERROR,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), (RhStatus, String)>) -> RhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RhStatus::RH_OK
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RhStatus::RH_PANIC
        }
    }
}

fn lift(e: Error) -> (RhStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (RhStatus, String) {
    (RhStatus::RH_NULL_POINTER, format!("{what} is null"))
}

fn invalid(msg: String) -> (RhStatus, String) {
    (RhStatus::RH_INVALID_ARGUMENT, msg)
}

unsafe fn out_slice<'a>(buf: *mut f64, len: usize, need: usize) -> Result<&'a mut [f64], (RhStatus, String)> {
    if buf.is_null() {
        return Err(null("output buffer"));
    }
    if len < need {
        return Err(invalid(format!("buffer holds {len} values, {need} needed")));
    }
    Ok(std::slice::from_raw_parts_mut(buf, need))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next `rh_*` call on the same thread.
#[no_mangle]
pub extern "C" fn rh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Euler run with `M = N = 1000`, `H = 0.6`, `κ = 100`, `k = 1`, one component.
#[no_mangle]
pub unsafe extern "C" fn rh_sim_params_default(out: *mut RhSimParams) -> RhStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = RhSimParams {
            scheme: RhScheme::RH_EULER,
            time_mesh: 1000,
            modes: 1000,
            hurst: 0.6,
            kappa: 100.0,
            k: 1.0,
            components: 1,
            seed: 0,
            oversample: 1,
        };
        Ok(())
    })
}

/// fBm on `steps` uniform intervals of `[0, 1]` with `components` independent
/// components.
#[no_mangle]
pub unsafe extern "C" fn rh_driver_sample_fbm(
    hurst: f64,
    steps: usize,
    components: usize,
    seed: u64,
    out: *mut *mut RhDriver,
) -> RhStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let path = FbmSampler::new(hurst, steps)
            .and_then(|s| s.sample(components, seed))
            .map_err(lift)?;
        *out = Box::into_raw(Box::new(RhDriver(path)));
        Ok(())
    })
}

/// Driver from caller samples: `(steps + 1) × components` values, row-major,
/// first row zero.
#[no_mangle]
pub unsafe extern "C" fn rh_driver_from_samples(
    data: *const f64,
    steps: usize,
    components: usize,
    hurst: f64,
    out: *mut *mut RhDriver,
) -> RhStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if data.is_null() {
            return Err(null("data"));
        }
        let n = steps
            .checked_add(1)
            .and_then(|r| r.checked_mul(components))
            .ok_or_else(|| invalid("driver size overflows".into()))?;
        let rows = std::slice::from_raw_parts(data, n).to_vec();
        let path = DriverPath::from_rows(rows, components, hurst, 0).map_err(lift)?;
        *out = Box::into_raw(Box::new(RhDriver(path)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rh_driver_free(driver: *mut RhDriver) {
    if !driver.is_null() {
        drop(Box::from_raw(driver));
    }
}

/// Number of intervals, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn rh_driver_steps(driver: *const RhDriver) -> usize {
    driver.as_ref().map_or(0, |d| d.0.steps())
}

/// Number of components, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn rh_driver_components(driver: *const RhDriver) -> usize {
    driver.as_ref().map_or(0, |d| d.0.components())
}

/// Copies the `(steps + 1) × components` samples, row-major.
#[no_mangle]
pub unsafe extern "C" fn rh_driver_copy_samples(
    driver: *const RhDriver,
    buf: *mut f64,
    len: usize,
) -> RhStatus {
    guard(|| {
        let d = driver.as_ref().ok_or_else(|| null("driver"))?;
        let rows = d.0.rows();
        out_slice(buf, len, rows.len())?.copy_from_slice(rows);
        Ok(())
    })
}

fn scheme_config(p: &RhSimParams) -> Result<SchemeConfig, (RhStatus, String)> {
    if p.components == 0 {
        return Err((RhStatus::RH_CONFIG_ERROR, "components must be at least 1".into()));
    }
    if p.scheme == RhScheme::RH_MILSTEIN && p.time_mesh > 24 {
        return Err((RhStatus::RH_CONFIG_ERROR, "Milstein exponent too large".into()));
    }
    let scheme = match p.scheme {
        RhScheme::RH_EULER => Scheme::Euler,
        RhScheme::RH_MILSTEIN => Scheme::Milstein,
    };
    let mut cfg = SchemeConfig::new(scheme, p.time_mesh, p.modes, p.hurst);
    cfg.kappa = p.kappa;
    cfg.nonlinearity = Nonlinearity::rational(p.k, p.components);
    cfg.initial = default_initial_condition(p.modes.max(1));
    cfg.seed = p.seed;
    cfg.oversample = p.oversample;
    cfg.validate().map_err(lift)?;
    Ok(cfg)
}

/// Runs the scheme in `params`. With a null `driver` one is sampled from
/// `params.seed`; otherwise its step count must match the scheme's.
#[no_mangle]
pub unsafe extern "C" fn rh_simulate(
    params: *const RhSimParams,
    driver: *const RhDriver,
    out: *mut *mut RhTrajectory,
) -> RhStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let cfg = scheme_config(p)?;
        let traj = match driver.as_ref() {
            Some(d) => run(&cfg, &d.0),
            None => FbmSampler::new(cfg.hurst, cfg.steps())
                .and_then(|s| s.sample(p.components, p.seed))
                .and_then(|d| run(&cfg, &d)),
        }
        .map_err(lift)?;
        *out = Box::into_raw(Box::new(RhTrajectory(traj)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rh_trajectory_free(traj: *mut RhTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of stored states (steps + 1), or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn rh_trajectory_len(traj: *const RhTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// Spectral modes per state, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn rh_trajectory_dim(traj: *const RhTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.dim())
}

#[no_mangle]
pub unsafe extern "C" fn rh_trajectory_time(
    traj: *const RhTrajectory,
    index: usize,
    out: *mut f64,
) -> RhStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| null("trajectory"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = *t.0.times().get(index).ok_or_else(|| invalid(format!("index {index} out of range")))?;
        Ok(())
    })
}

/// Copies the `dim` eigenbasis coefficients of state `index`.
#[no_mangle]
pub unsafe extern "C" fn rh_trajectory_copy_state(
    traj: *const RhTrajectory,
    index: usize,
    buf: *mut f64,
    len: usize,
) -> RhStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| null("trajectory"))?;
        if index >= t.0.len() {
            return Err(invalid(format!("index {index} out of range")));
        }
        out_slice(buf, len, t.0.dim())?.copy_from_slice(t.0.coeffs(index));
        Ok(())
    })
}

/// Writes `Y_t(xi)` for every stored time into `buf` (length `len`).
#[no_mangle]
pub unsafe extern "C" fn rh_trajectory_probe(
    traj: *const RhTrajectory,
    xi: f64,
    buf: *mut f64,
    len: usize,
) -> RhStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| null("trajectory"))?;
        if !(0.0..=1.0).contains(&xi) {
            return Err(invalid(format!("probe point {xi} outside [0,1]")));
        }
        out_slice(buf, len, t.0.len())?.copy_from_slice(&t.0.probe(xi));
        Ok(())
    })
}

/// `(1 - e^{-λh}) / (λh)`; NaN for negative or non-finite input.
#[no_mangle]
pub extern "C" fn rh_weight1(lambda: f64, h: f64) -> f64 {
    if lambda >= 0.0 && h > 0.0 && lambda.is_finite() && h.is_finite() {
        weight1(lambda, h)
    } else {
        f64::NAN
    }
}

/// `∫_0^1 e^{-λh(1-s)} s ds`; NaN for negative or non-finite input.
#[no_mangle]
pub extern "C" fn rh_weight2(lambda: f64, h: f64) -> f64 {
    if lambda >= 0.0 && h > 0.0 && lambda.is_finite() && h.is_finite() {
        weight2(lambda, h)
    } else {
        f64::NAN
    }
}

/// `sqrt(Σ λ_n^{2κ} y_n^2)` of `len` eigenbasis coefficients.
#[no_mangle]
pub unsafe extern "C" fn rh_sobolev_norm(
    coeffs: *const f64,
    len: usize,
    kappa: f64,
    out: *mut f64,
) -> RhStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if coeffs.is_null() {
            return Err(null("coeffs"));
        }
        let y = SpectralState::new(std::slice::from_raw_parts(coeffs, len).to_vec()).map_err(lift)?;
        *out = sobolev_norm(&y, kappa);
        Ok(())
    })
}

/// Convenience for tests and bindings: the last error as a Rust string.
pub fn last_error_string() -> String {
    unsafe { CStr::from_ptr(rh_last_error()) }.to_string_lossy().into_owned()
}
