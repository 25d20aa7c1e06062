//! C interface to the exponent calculus, the propagator, radial profiles and
//! solver runs.
//!
//! Every function returns a [`CritexStatus`]; results go through out-pointers.
//! On failure a message is available from [`critex_last_error`] on the same
//! thread. Handles written through `handle` out-pointers are released by the
//! matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use critex::exponents::{self, Regime, RegimeParams};
use critex::propagator;
use critex::radial::{self, RadialGrid, RadialProfile, DEFAULT_R_MAX, DEFAULT_R_MIN};
use critex::solver::{self, RunResult, SolverConfig, Status};
use critex::spectral::GridSpec;
use critex::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CritexStatus {
    Ok = 0,
    Domain = 1,
    Contract = 2,
    Accuracy = 3,
    InsufficientData = 4,
    Io = 5,
    Json = 6,
    NullPointer = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CritexRegime {
    GlobalExistence = 0,
    BlowUp = 1,
    CriticalOpen = 2,
    OutsideTheory = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CritexCurveKind {
    Damped = 0,
    Heat = 1,
    Difference = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CritexRunKind {
    Completed = 0,
    BlowUp = 1,
    StepUnderflow = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CritexPropagator {
    pub k00: f64,
    pub k01: f64,
    pub k10: f64,
    pub k11: f64,
    pub underflow: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CritexSolverConfig {
    pub p: f64,
    pub eps: f64,
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub theta: f64,
    pub growth_factor: f64,
    pub dt_min_ratio: f64,
    pub samples: usize,
    pub nonlinear: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CritexRunStatus {
    pub kind: CritexRunKind,
    /// Blow-up time; zero for completed runs.
    pub time: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CritexHistoryRow {
    pub t: f64,
    pub l2: f64,
    pub hs: f64,
    pub hneg: f64,
    pub maxabs: f64,
    pub energy: f64,
}

/// Opaque radial spectral profile.
pub struct CritexRadialProfile(RadialProfile);

/// Opaque finished solver run.
pub struct CritexRun(RunResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn code(e: &Error) -> CritexStatus {
    match e {
        Error::Domain(_) => CritexStatus::Domain,
        Error::Contract(_) => CritexStatus::Contract,
        Error::Accuracy(_) => CritexStatus::Accuracy,
        Error::InsufficientData(_) => CritexStatus::InsufficientData,
        Error::Io(_) => CritexStatus::Io,
        Error::Json(_) => CritexStatus::Json,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CritexStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CritexStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            code(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed for {what}"));
            CritexStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic".into());
            CritexStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn critex_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

unsafe fn scalar(result: *mut f64, f: impl FnOnce() -> critex::Result<f64>) -> CritexStatus {
    guard(|| {
        let r = out(result, "result")?;
        *r = f()?;
        Ok(())
    })
}

/// `1 + 2/n`.
///
/// # Safety
/// `result` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn critex_p_fujita(n: f64, result: *mut f64) -> CritexStatus {
    scalar(result, || exponents::p_fujita(n))
}

/// `1 + 4/(n + 2γ)`.
///
/// # Safety
/// `result` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn critex_p_crit(n: f64, gamma: f64, result: *mut f64) -> CritexStatus {
    scalar(result, || exponents::p_crit(n, gamma))
}

/// Positive root of `2γ² + nγ - 2n = 0`.
///
/// # Safety
/// `result` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn critex_gamma_tilde(n: f64, result: *mut f64) -> CritexStatus {
    scalar(result, || exponents::gamma_tilde(n))
}

/// Lifespan power `-2/(2p' - 2 - n/2 - γ)` for subcritical `p`.
///
/// # Safety
/// `result` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn critex_lifespan_exponent(p: f64, n: f64, gamma: f64, result: *mut f64) -> CritexStatus {
    scalar(result, || exponents::lifespan_exponent(p, n, gamma))
}

/// `1 - (n/4 + γ/2)(p - 1)`.
///
/// # Safety
/// `result` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn critex_alpha0(p: f64, n: f64, gamma: f64, result: *mut f64) -> CritexStatus {
    scalar(result, || exponents::alpha0(p, n, gamma))
}

/// `2n/(n + 2γ)`.
///
/// # Safety
/// `result` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn critex_hls_pair(gamma: f64, n: f64, result: *mut f64) -> CritexStatus {
    scalar(result, || exponents::hls_pair(gamma, n))
}

/// Whether `n + 2 - 2p' < n/2 - γ`.
///
/// # Safety
/// `result` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn critex_contradiction_gate(n: f64, gamma: f64, p: f64, result: *mut bool) -> CritexStatus {
    guard(|| {
        *out(result, "result")? = exponents::contradiction_gate(n, gamma, p)?;
        Ok(())
    })
}

/// Regime of `(n, γ, s, p)`.
///
/// # Safety
/// `result` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn critex_classify_regime(
    n: f64,
    gamma: f64,
    s: f64,
    p: f64,
    result: *mut CritexRegime,
) -> CritexStatus {
    guard(|| {
        let r = out(result, "result")?;
        let verdict = exponents::classify_regime(&RegimeParams::new(n, gamma, s, p))?;
        *r = match verdict.regime {
            Regime::GlobalExistence => CritexRegime::GlobalExistence,
            Regime::BlowUp => CritexRegime::BlowUp,
            Regime::CriticalOpen => CritexRegime::CriticalOpen,
            Regime::OutsideTheory => CritexRegime::OutsideTheory,
        };
        Ok(())
    })
}

/// Propagator matrix at time `t` and frequency `r`.
///
/// # Safety
/// `result` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn critex_propagator(t: f64, r: f64, result: *mut CritexPropagator) -> CritexStatus {
    guard(|| {
        let res = out(result, "result")?;
        let m = propagator::propagator(t, r)?;
        *res = CritexPropagator {
            k00: m.k00,
            k01: m.k01,
            k10: m.k10,
            k11: m.k11,
            underflow: m.underflow,
        };
        Ok(())
    })
}

fn radial_grid(points: usize) -> Result<RadialGrid, Failure> {
    Ok(RadialGrid::log_spaced(DEFAULT_R_MIN, DEFAULT_R_MAX, points)?)
}

fn boxed_profile(p: RadialProfile, handle: &mut *mut CritexRadialProfile) {
    *handle = Box::into_raw(Box::new(CritexRadialProfile(p)));
}

/// `r^{-a}` on `(0, cutoff]` over a log grid on `[1e-6, 1e3]` with `points` nodes.
///
/// # Safety
/// `handle` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn critex_radial_power_law(
    dim: f64,
    a: f64,
    cutoff: f64,
    points: usize,
    handle: *mut *mut CritexRadialProfile,
) -> CritexStatus {
    guard(|| {
        let h = out(handle, "handle")?;
        boxed_profile(RadialProfile::power_law(dim, a, cutoff, radial_grid(points)?)?, h);
        Ok(())
    })
}

/// `exp(-w r²)` over a log grid on `[1e-6, 1e3]` with `points` nodes.
///
/// # Safety
/// `handle` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn critex_radial_gaussian(
    dim: f64,
    w: f64,
    points: usize,
    handle: *mut *mut CritexRadialProfile,
) -> CritexStatus {
    guard(|| {
        let h = out(handle, "handle")?;
        boxed_profile(RadialProfile::gaussian(dim, w, radial_grid(points)?)?, h);
        Ok(())
    })
}

/// Zero profile on the grid of `like`.
///
/// # Safety
/// `like` must be a live profile handle; `handle` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn critex_radial_zeros_like(
    like: *const CritexRadialProfile,
    handle: *mut *mut CritexRadialProfile,
) -> CritexStatus {
    guard(|| {
        let src = like.as_ref().ok_or(Failure::Null("like"))?;
        let h = out(handle, "handle")?;
        boxed_profile(RadialProfile::zeros_like(&src.0), h);
        Ok(())
    })
}

/// Radial Sobolev norm of order `s`.
///
/// # Safety
/// `profile` must be a live handle; `result` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn critex_radial_norm(
    profile: *const CritexRadialProfile,
    s: f64,
    result: *mut f64,
) -> CritexStatus {
    guard(|| {
        let p = profile.as_ref().ok_or(Failure::Null("profile"))?;
        *out(result, "result")? = radial::norm_radial(&p.0, s)?;
        Ok(())
    })
}

/// Norm curve of the chosen evolution at `len` times, written to `norms`.
///
/// # Safety
/// `v0`, `v1` must be live handles; `times` and `norms` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn critex_radial_curve(
    v0: *const CritexRadialProfile,
    v1: *const CritexRadialProfile,
    kind: CritexCurveKind,
    times: *const f64,
    len: usize,
    s: f64,
    gamma: f64,
    norms: *mut f64,
) -> CritexStatus {
    guard(|| {
        let a = v0.as_ref().ok_or(Failure::Null("v0"))?;
        let b = v1.as_ref().ok_or(Failure::Null("v1"))?;
        let ts = slice(times, len, "times")?;
        if len > 0 && norms.is_null() {
            return Err(Failure::Null("norms"));
        }
        let curve = match kind {
            CritexCurveKind::Damped => radial::evolve_damped(&a.0, &b.0, ts, s, gamma)?,
            CritexCurveKind::Heat => radial::evolve_heat(&a.0, &b.0, ts, s, gamma)?,
            CritexCurveKind::Difference => radial::diffusion_difference(&a.0, &b.0, ts, s, gamma)?,
        };
        if len > 0 {
            std::slice::from_raw_parts_mut(norms, len).copy_from_slice(&curve.norms);
        }
        Ok(())
    })
}

/// Release a profile; null is ignored.
///
/// # Safety
/// `profile` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn critex_radial_free(profile: *mut CritexRadialProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Solver configuration with every default filled in.
#[no_mangle]
pub extern "C" fn critex_solver_config_default(p: f64, eps: f64, dt: f64, t_end: f64) -> CritexSolverConfig {
    let c = SolverConfig::new(p, eps, dt, t_end);
    CritexSolverConfig {
        p: c.p,
        eps: c.eps,
        dt: c.dt,
        t_end: c.t_end,
        dealias: c.dealias,
        theta: c.theta,
        growth_factor: c.growth_factor,
        dt_min_ratio: c.dt_min_ratio,
        samples: c.samples,
        nonlinear: c.nonlinear,
    }
}

/// Evolve `(eps u0, eps u1)` on a periodic grid of `points^dim` samples and
/// box length `length`.
///
/// # Safety
/// `config` must be valid; `u0`, `u1` must hold `len` values; `handle` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn critex_run(
    config: *const CritexSolverConfig,
    dim: usize,
    points: usize,
    length: f64,
    u0: *const f64,
    u1: *const f64,
    len: usize,
    s: f64,
    gamma: f64,
    handle: *mut *mut CritexRun,
) -> CritexStatus {
    guard(|| {
        let c = config.as_ref().ok_or(Failure::Null("config"))?;
        let h = out(handle, "handle")?;
        let u0 = slice(u0, len, "u0")?;
        let u1 = slice(u1, len, "u1")?;
        let grid = GridSpec::new(dim, length, points)?;
        let cfg = SolverConfig {
            p: c.p,
            eps: c.eps,
            dt: c.dt,
            t_end: c.t_end,
            dealias: c.dealias,
            theta: c.theta,
            growth_factor: c.growth_factor,
            dt_min_ratio: c.dt_min_ratio,
            samples: c.samples,
            nonlinear: c.nonlinear,
        };
        let result = solver::run(&cfg, u0, u1, &grid, s, gamma)?;
        *h = Box::into_raw(Box::new(CritexRun(result)));
        Ok(())
    })
}

/// Final status of a run.
///
/// # Safety
/// `run` must be a live handle; `result` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn critex_run_status(run: *const CritexRun, result: *mut CritexRunStatus) -> CritexStatus {
    guard(|| {
        let r = run.as_ref().ok_or(Failure::Null("run"))?;
        *out(result, "result")? = match r.0.status {
            Status::Completed => CritexRunStatus {
                kind: CritexRunKind::Completed,
                time: 0.0,
            },
            Status::BlowUp(t) => CritexRunStatus {
                kind: CritexRunKind::BlowUp,
                time: t,
            },
            Status::StepUnderflow(t) => CritexRunStatus {
                kind: CritexRunKind::StepUnderflow,
                time: t,
            },
        };
        Ok(())
    })
}

/// Supremum of the weighted solution norm over the history.
///
/// # Safety
/// `run` must be a live handle; `result` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn critex_run_weighted_sup(run: *const CritexRun, result: *mut f64) -> CritexStatus {
    guard(|| {
        let r = run.as_ref().ok_or(Failure::Null("run"))?;
        *out(result, "result")? = r.0.weighted_sup;
        Ok(())
    })
}

/// Number of history rows.
///
/// # Safety
/// `run` must be a live handle; `result` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn critex_run_history_len(run: *const CritexRun, result: *mut usize) -> CritexStatus {
    guard(|| {
        let r = run.as_ref().ok_or(Failure::Null("run"))?;
        *out(result, "result")? = r.0.history.len();
        Ok(())
    })
}

/// History row `index`.
///
/// # Safety
/// `run` must be a live handle; `result` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn critex_run_history_row(
    run: *const CritexRun,
    index: usize,
    result: *mut CritexHistoryRow,
) -> CritexStatus {
    guard(|| {
        let r = run.as_ref().ok_or(Failure::Null("run"))?;
        let res = out(result, "result")?;
        let row = r.0.history.get(index).ok_or_else(|| {
            Error::Contract(format!("history row {index} out of range ({})", r.0.history.len()))
        })?;
        *res = CritexHistoryRow {
            t: row.t,
            l2: row.l2,
            hs: row.hs,
            hneg: row.hneg,
            maxabs: row.maxabs,
            energy: row.energy,
        };
        Ok(())
    })
}

/// Release a run; null is ignored.
///
/// # Safety
/// `run` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn critex_run_free(run: *mut CritexRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
