//! C ABI for `lambda-phase`.
//!
//! Every fallible function returns an [`LpStatus`]. On failure the message is
//! available from [`lp_last_error_message`] on the same thread until the next
//! failing call. Simulations are opaque handles created by
//! [`lp_simulation_new`] and released with [`lp_simulation_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lambda_phase::config::preset;
use lambda_phase::dynamics::{poisson_weight, truncation_cutoff};
use lambda_phase::num_complex::Complex64;
use lambda_phase::verify::{self, Suite};
use lambda_phase::{Error, Sample, Simulation, SystemParams, Transition};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Io = 4,
    VerifyFailed = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LpComplex {
    pub re: f64,
    pub im: f64,
}

/// Couplings, detunings, mean photon numbers, initial atomic amplitudes and
/// Poisson tail threshold.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LpParams {
    pub g_a: f64,
    pub g_b: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub nbar_a: f64,
    pub nbar_b: f64,
    pub c: [LpComplex; 3],
    pub epsilon: f64,
}

/// Phase probabilities are ordered `[P(0), P(+π/2), P(−π/2)]`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LpSample {
    pub time: f64,
    pub p13: [f64; 3],
    pub p23: [f64; 3],
    pub p12: [f64; 3],
    pub populations: [f64; 3],
    pub norm: f64,
}

/// Opaque simulation handle.
pub struct LpSimulation(Simulation);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(LpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => LpStatus::Io,
            Error::NotHermitian(_) | Error::EigenFailure | Error::NotNormalized(_) | Error::RowInvariant { .. } => {
                LpStatus::Numerical
            }
            _ => LpStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LpStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LpStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal panic: {msg}"));
            LpStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(LpStatus::InvalidArgument, format!("`{what}` is not valid UTF-8")))
}

impl From<&LpParams> for SystemParams {
    fn from(p: &LpParams) -> Self {
        SystemParams {
            g_a: p.g_a,
            g_b: p.g_b,
            delta_a: p.delta_a,
            delta_b: p.delta_b,
            nbar_a: p.nbar_a,
            nbar_b: p.nbar_b,
            c: p.c.map(|z| Complex64::new(z.re, z.im)),
            epsilon: p.epsilon,
        }
    }
}

impl From<&SystemParams> for LpParams {
    fn from(p: &SystemParams) -> Self {
        LpParams {
            g_a: p.g_a,
            g_b: p.g_b,
            delta_a: p.delta_a,
            delta_b: p.delta_b,
            nbar_a: p.nbar_a,
            nbar_b: p.nbar_b,
            c: p.c.map(|z| LpComplex { re: z.re, im: z.im }),
            epsilon: p.epsilon,
        }
    }
}

impl From<&Sample> for LpSample {
    fn from(s: &Sample) -> Self {
        LpSample {
            time: s.time,
            p13: s.distribution(Transition::OneThree).as_array(),
            p23: s.distribution(Transition::TwoThree).as_array(),
            p12: s.distribution(Transition::OneTwo).as_array(),
            populations: s.populations,
            norm: s.norm,
        }
    }
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds the initial state and diagonalizes every populated subspace.
///
/// # Safety
/// `params` must point to a valid `LpParams`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lp_simulation_new(params: *const LpParams, out: *mut *mut LpSimulation) -> LpStatus {
    guard(|| {
        let params = params.as_ref().ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let sim = Simulation::new(SystemParams::from(params))?;
        *out = Box::into_raw(Box::new(LpSimulation(sim)));
        Ok(())
    })
}

/// # Safety
/// `sim` must come from `lp_simulation_new` and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lp_simulation_free(sim: *mut LpSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Number of populated invariant subspaces.
///
/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lp_simulation_subspace_count(sim: *const LpSimulation, out: *mut usize) -> LpStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = sim.0.subspace_count();
        Ok(())
    })
}

/// Distributions at interaction-picture time `t ≥ 0`.
///
/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lp_simulation_sample(sim: *const LpSimulation, t: f64, out: *mut LpSample) -> LpStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = LpSample::from(&sim.0.sample(t)?);
        Ok(())
    })
}

/// Samples `len` times into `out[0..len]`.
///
/// # Safety
/// `times` must hold `len` readable values and `out` `len` writable samples.
#[no_mangle]
pub unsafe extern "C" fn lp_simulation_run(
    sim: *const LpSimulation,
    times: *const f64,
    len: usize,
    out: *mut LpSample,
) -> LpStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        if len == 0 {
            return Ok(());
        }
        if times.is_null() {
            return Err(null("times"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let times = std::slice::from_raw_parts(times, len);
        let samples = sim.0.run(times)?;
        let out = std::slice::from_raw_parts_mut(out, len);
        for (o, s) in out.iter_mut().zip(&samples) {
            *o = LpSample::from(s);
        }
        Ok(())
    })
}

/// Parameters and τ grid of a built-in scenario (`fig2`, `fig3a`, `fig3b`, `fig4`).
/// `tau_max` and `tau_steps` may be null.
///
/// # Safety
/// `name` must be a nul-terminated string; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lp_preset_params(
    name: *const c_char,
    out: *mut LpParams,
    tau_max: *mut f64,
    tau_steps: *mut usize,
) -> LpStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let cfg = preset(name)?;
        *out = LpParams::from(&cfg.params());
        if let Some(t) = tau_max.as_mut() {
            *t = cfg.tau_max;
        }
        if let Some(s) = tau_steps.as_mut() {
            *s = cfg.tau_steps;
        }
        Ok(())
    })
}

/// Runs a verification suite. Writes the number of failed checks to
/// `failures` (if non-null) and returns `LP_STATUS_VERIFY_FAILED` when it is nonzero.
///
/// # Safety
/// `suite` must be a nul-terminated string; `failures` may be null.
#[no_mangle]
pub unsafe extern "C" fn lp_verify(suite: *const c_char, failures: *mut usize) -> LpStatus {
    guard(|| {
        let suite: Suite = str_arg(suite, "suite")?.parse()?;
        let report = verify::run(suite)?;
        let failed: Vec<String> = report.failures().map(|c| c.to_string()).collect();
        if let Some(f) = failures.as_mut() {
            *f = failed.len();
        }
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Failure(LpStatus::VerifyFailed, failed.join("\n")))
        }
    })
}

/// `Q_n = √(e^{−n̄} n̄ⁿ / n!)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lp_poisson_weight(nbar: f64, n: u64, out: *mut f64) -> LpStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = poisson_weight(nbar, n)?;
        Ok(())
    })
}

/// Smallest `N` with `Σ_{n≤N} Q_n² ≥ 1 − epsilon`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lp_truncation_cutoff(nbar: f64, epsilon: f64, out: *mut u64) -> LpStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = truncation_cutoff(nbar, epsilon)?;
        Ok(())
    })
}
