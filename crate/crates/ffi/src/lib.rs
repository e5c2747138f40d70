//! C interface to the `sfista` solver.
//!
//! Problems and solvers are opaque handles created and destroyed through
//! this API. Every fallible call returns an [`SfStatus`]; on failure
//! [`sf_last_error`] holds a message for the calling thread. Panics never
//! cross the boundary and are reported as `SF_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CString};
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use ndarray::{Array1, ArrayView1};
use sfista::bounds::{self, BoundInputs, Criterion};
use sfista::certificates::{residual_pair, stationarity_residual};
use sfista::engine::{self, IterateState, SolverConfig};
use sfista::problem::instance::{InstanceKind, InstanceParams, InstanceSpec};
use sfista::problem::{CompositeProblem, ExtReal, Point, ProxOracle, SmoothOracle};
use sfista::verify::default_start;
use sfista::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InvalidConfig = 4,
    InvalidStart = 5,
    NumericFailure = 6,
    UndefinedCertificate = 7,
    GrowthOverflow = 8,
    UnsupportedBound = 9,
    Unsupported = 10,
    Parse = 11,
    Io = 12,
    Panic = 13,
}

impl From<&Error> for SfStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) => SfStatus::InvalidArgument,
            Error::DimensionMismatch { .. } => SfStatus::DimensionMismatch,
            Error::InvalidConfig(_) => SfStatus::InvalidConfig,
            Error::InvalidStart => SfStatus::InvalidStart,
            Error::NumericFailure(_) => SfStatus::NumericFailure,
            Error::UndefinedCertificate => SfStatus::UndefinedCertificate,
            Error::GrowthOverflow(_) => SfStatus::GrowthOverflow,
            Error::UnsupportedBound(_) => SfStatus::UnsupportedBound,
            Error::Unsupported(_) => SfStatus::Unsupported,
            Error::Parse(_) => SfStatus::Parse,
            Error::Io(_) | Error::Csv(_) => SfStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfProblemKind {
    Lasso = 0,
    ElasticNet = 1,
    BoxQp = 2,
    LogisticL2 = 3,
}

impl From<SfProblemKind> for InstanceKind {
    fn from(k: SfProblemKind) -> Self {
        match k {
            SfProblemKind::Lasso => InstanceKind::Lasso,
            SfProblemKind::ElasticNet => InstanceKind::ElasticNet,
            SfProblemKind::BoxQp => InstanceKind::BoxQp,
            SfProblemKind::LogisticL2 => InstanceKind::LogisticL2,
        }
    }
}

/// Generator parameters. Fields a kind does not use must keep the values
/// returned by `sf_instance_params_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfInstanceParams {
    pub reg: f64,
    pub ridge: f64,
    pub h_ridge: f64,
    pub box_lo: f64,
    pub box_hi: f64,
    /// Nonzero selects the diagonal `box_qp` variant.
    pub diagonal: i32,
}

impl From<InstanceParams> for SfInstanceParams {
    fn from(p: InstanceParams) -> Self {
        SfInstanceParams {
            reg: p.reg,
            ridge: p.ridge,
            h_ridge: p.h_ridge,
            box_lo: p.box_lo,
            box_hi: p.box_hi,
            diagonal: p.diagonal as i32,
        }
    }
}

impl From<SfInstanceParams> for InstanceParams {
    fn from(p: SfInstanceParams) -> Self {
        InstanceParams {
            reg: p.reg,
            ridge: p.ridge,
            h_ridge: p.h_ridge,
            box_lo: p.box_lo,
            box_hi: p.box_hi,
            diagonal: p.diagonal != 0,
        }
    }
}

/// `f(x)` for a vector of length `n`.
pub type SfValueFn = Option<unsafe extern "C" fn(user: *mut c_void, x: *const f64, n: usize) -> f64>;
/// Writes `∇f(x)` into `out` (length `n`).
pub type SfGradientFn = Option<unsafe extern "C" fn(user: *mut c_void, x: *const f64, n: usize, out: *mut f64)>;
/// Writes `prox_{step h}(x)` into `out` (length `n`).
pub type SfProxFn =
    Option<unsafe extern "C" fn(user: *mut c_void, x: *const f64, n: usize, step: f64, out: *mut f64)>;

/// User-supplied problem `f + h`. `h_value` returns `INFINITY` outside
/// `dom h`. The callbacks may be invoked from several threads at once and
/// `user_data` must stay valid until the problem handle is freed.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct SfCallbacks {
    pub user_data: *mut c_void,
    pub f_value: SfValueFn,
    pub f_gradient: SfGradientFn,
    pub l_bar_f: f64,
    pub mu_bar_f: f64,
    pub h_value: SfValueFn,
    pub h_prox: SfProxFn,
    pub mu_bar_h: f64,
}

/// Opaque problem handle.
pub struct SfProblem {
    inner: Arc<CompositeProblem>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfCriterionKind {
    None = 0,
    FunctionGap = 1,
    Stationarity = 2,
    Relative = 3,
    AlternateRelative = 4,
    Absolute = 5,
}

/// Stopping rule. `value` is `eps_bar`, `rho`, `sigma_tilde`, `sigma` or
/// `eps` depending on `kind`; `eta_tol` is read only by `ABSOLUTE`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfCriterion {
    pub kind: SfCriterionKind,
    pub value: f64,
    pub eta_tol: f64,
}

impl SfCriterion {
    fn to_core(self) -> Option<Criterion> {
        let v = self.value;
        match self.kind {
            SfCriterionKind::None => None,
            SfCriterionKind::FunctionGap => Some(Criterion::FunctionGap { eps_bar: v }),
            SfCriterionKind::Stationarity => Some(Criterion::Stationarity { rho: v }),
            SfCriterionKind::Relative => Some(Criterion::Relative { sigma_tilde: v }),
            SfCriterionKind::AlternateRelative => Some(Criterion::AlternateRelative { sigma: v }),
            SfCriterionKind::Absolute => Some(Criterion::Absolute { eps: v, eta_tol: self.eta_tol }),
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfSolverConfig {
    pub l_f: f64,
    pub mu_f: f64,
    pub mu_h: f64,
    /// Cap on the total iteration count `k`.
    pub max_iter: u64,
    pub criterion: SfCriterion,
}

impl SfSolverConfig {
    fn to_core(self) -> SolverConfig {
        SolverConfig {
            l_f: self.l_f,
            mu_f: self.mu_f,
            mu_h: self.mu_h,
            max_iter: self.max_iter,
            criterion: self.criterion.to_core(),
            ..SolverConfig::default()
        }
    }
}

/// Opaque solver handle. Keeps its problem alive on its own.
pub struct SfSolver {
    problem: Arc<CompositeProblem>,
    config: SolverConfig,
    state: IterateState,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStopReason {
    Converged = 0,
    MaxIter = 1,
    GrowthOverflow = 2,
}

/// Residuals at the current iterate (`k >= 1`).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfCertificates {
    pub norm_u: f64,
    pub norm_v: f64,
    pub eta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfBoundInputs {
    pub d0: f64,
    pub l_f: f64,
    pub l_f_bar: f64,
    pub mu_f: f64,
    pub mu: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl fmt::Display) {
    let text = msg.to_string().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Failure(SfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(SfStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SfStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            SfStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    *deref_mut(out, what)? = value;
    Ok(())
}

unsafe fn copy_point(src: &Point, out: *mut f64, n: usize) -> Result<(), Failure> {
    if n != src.len() {
        return Err(Error::DimensionMismatch { expected: src.len(), got: n }.into());
    }
    if out.is_null() {
        return Err(null("out"));
    }
    std::slice::from_raw_parts_mut(out, n).copy_from_slice(src.as_slice().expect("owned vectors are contiguous"));
    Ok(())
}

/// Message for the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn sf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(s) => s.as_ptr(),
        None => c"".as_ptr(),
    })
}

/// Static string naming the library version.
#[no_mangle]
pub extern "C" fn sf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_instance_params_default(kind: SfProblemKind, out: *mut SfInstanceParams) -> SfStatus {
    guard(|| write_out(out, InstanceParams::defaults(kind.into()).into(), "out"))
}

/// Generates a seeded test instance. `params` may be null for the defaults.
///
/// # Safety
/// `params` must be null or valid; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_problem_generate(
    kind: SfProblemKind,
    seed: u64,
    m: usize,
    n: usize,
    params: *const SfInstanceParams,
    out: *mut *mut SfProblem,
) -> SfStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let kind = InstanceKind::from(kind);
        let params = match params.as_ref() {
            Some(p) => InstanceParams::from(*p),
            None => InstanceParams::defaults(kind),
        };
        let problem = InstanceSpec::new(kind, seed, m, n).with_params(params).build()?;
        *out = Box::into_raw(Box::new(SfProblem { inner: Arc::new(problem) }));
        Ok(())
    })
}

struct CallbackSet(SfCallbacks);

// The caller promises thread-safe callbacks and a live `user_data`.
unsafe impl Send for CallbackSet {}
unsafe impl Sync for CallbackSet {}

impl fmt::Debug for CallbackSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CallbackSet").field("user_data", &self.0.user_data).finish_non_exhaustive()
    }
}

#[derive(Debug)]
struct CallbackSmooth(Arc<CallbackSet>);

#[derive(Debug)]
struct CallbackProx(Arc<CallbackSet>);

fn contiguous(x: ArrayView1<f64>) -> Point {
    x.to_owned()
}

impl SmoothOracle for CallbackSmooth {
    fn value(&self, x: ArrayView1<f64>) -> f64 {
        let x = contiguous(x);
        let cb = &self.0 .0;
        unsafe { cb.f_value.expect("checked at construction")(cb.user_data, x.as_ptr(), x.len()) }
    }

    fn gradient(&self, x: ArrayView1<f64>) -> Point {
        let x = contiguous(x);
        let cb = &self.0 .0;
        let mut out = Array1::zeros(x.len());
        unsafe { cb.f_gradient.expect("checked at construction")(cb.user_data, x.as_ptr(), x.len(), out.as_mut_ptr()) };
        out
    }

    fn strong_convexity(&self) -> f64 {
        self.0 .0.mu_bar_f
    }

    fn upper_curvature(&self) -> f64 {
        self.0 .0.l_bar_f
    }
}

impl ProxOracle for CallbackProx {
    fn value(&self, x: ArrayView1<f64>) -> ExtReal {
        let x = contiguous(x);
        let cb = &self.0 .0;
        let v = unsafe { cb.h_value.expect("checked at construction")(cb.user_data, x.as_ptr(), x.len()) };
        ExtReal::from(v)
    }

    fn prox(&self, x: ArrayView1<f64>, step: f64) -> Point {
        let x = contiguous(x);
        let cb = &self.0 .0;
        let mut out = Array1::zeros(x.len());
        unsafe {
            cb.h_prox.expect("checked at construction")(cb.user_data, x.as_ptr(), x.len(), step, out.as_mut_ptr())
        };
        out
    }

    fn strong_convexity(&self) -> f64 {
        self.0 .0.mu_bar_h
    }
}

/// Wraps user callbacks as a problem of dimension `dim`.
///
/// # Safety
/// `callbacks` and `out` must be valid pointers. See [`SfCallbacks`] for the
/// contract on the callbacks themselves.
#[no_mangle]
pub unsafe extern "C" fn sf_problem_from_callbacks(
    callbacks: *const SfCallbacks,
    dim: usize,
    out: *mut *mut SfProblem,
) -> SfStatus {
    guard(|| {
        let cb = *deref(callbacks, "callbacks")?;
        let out = deref_mut(out, "out")?;
        if cb.f_value.is_none() || cb.f_gradient.is_none() || cb.h_value.is_none() || cb.h_prox.is_none() {
            return Err(null("callback"));
        }
        let set = Arc::new(CallbackSet(cb));
        let problem =
            CompositeProblem::new(Box::new(CallbackSmooth(set.clone())), Box::new(CallbackProx(set)), dim)?;
        *out = Box::into_raw(Box::new(SfProblem { inner: Arc::new(problem) }));
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn sf_problem_free(problem: *mut SfProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Dimension of the problem, 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_problem_dim(problem: *const SfProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.dim())
}

/// `L_bar_f`, `mu_bar_f`, `mu_bar_h`. Any output pointer may be null.
///
/// # Safety
/// `problem` must be a live handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn sf_problem_constants(
    problem: *const SfProblem,
    l_bar_f: *mut f64,
    mu_bar_f: *mut f64,
    mu_bar_h: *mut f64,
) -> SfStatus {
    guard(|| {
        let p = &deref(problem, "problem")?.inner;
        for (out, v) in [(l_bar_f, p.upper_curvature()), (mu_bar_f, p.mu_bar_f()), (mu_bar_h, p.mu_bar_h())] {
            if let Some(o) = out.as_mut() {
                *o = v;
            }
        }
        Ok(())
    })
}

/// `phi(x)`, written as `INFINITY` outside `dom h`.
///
/// # Safety
/// `problem` must be a live handle, `x` must hold `n` values, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sf_problem_objective(
    problem: *const SfProblem,
    x: *const f64,
    n: usize,
    out: *mut f64,
) -> SfStatus {
    guard(|| {
        let p = &deref(problem, "problem")?.inner;
        let x = slice(x, n, "x")?;
        let v = p.eval_phi(ArrayView1::from(x))?;
        write_out(out, v.to_f64(), "out")
    })
}

/// Optimal value recorded with a generated instance. Callback problems
/// have none and return `SF_STATUS_UNSUPPORTED`.
///
/// # Safety
/// `problem` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sf_problem_reference_value(problem: *const SfProblem, out: *mut f64) -> SfStatus {
    guard(|| {
        let p = &deref(problem, "problem")?.inner;
        let r = p.reference().ok_or_else(|| Failure(SfStatus::Unsupported, "problem has no reference optimum".into()))?;
        write_out(out, r.phi_star, "out")
    })
}

/// Default settings for `problem`: `L_f = 1.25 L_bar_f`, all available
/// strong convexity, 10000 iterations, no criterion.
///
/// # Safety
/// `problem` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sf_solver_config_default(problem: *const SfProblem, out: *mut SfSolverConfig) -> SfStatus {
    guard(|| {
        let c = SolverConfig::for_problem(&deref(problem, "problem")?.inner);
        let config = SfSolverConfig {
            l_f: c.l_f,
            mu_f: c.mu_f,
            mu_h: c.mu_h,
            max_iter: c.max_iter,
            criterion: SfCriterion { kind: SfCriterionKind::None, value: 0.0, eta_tol: 0.0 },
        };
        write_out(out, config, "out")
    })
}

/// Starts a solver at `x0` (length `n`), or at `prox_h(0)` when `x0` is null.
///
/// # Safety
/// `problem` and `config` must be valid, `x0` null or holding `n` values,
/// `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sf_solver_new(
    problem: *const SfProblem,
    config: *const SfSolverConfig,
    x0: *const f64,
    n: usize,
    out: *mut *mut SfSolver,
) -> SfStatus {
    guard(|| {
        let problem = deref(problem, "problem")?.inner.clone();
        let config = deref(config, "config")?.to_core();
        let out = deref_mut(out, "out")?;
        let start = if x0.is_null() { default_start(&problem) } else { Array1::from(slice(x0, n, "x0")?.to_vec()) };
        let state = engine::init(&problem, &config, start.view())?;
        *out = Box::into_raw(Box::new(SfSolver { problem, config, state }));
        Ok(())
    })
}

/// # Safety
/// `solver` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn sf_solver_free(solver: *mut SfSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// One iteration. Returns `SF_STATUS_GROWTH_OVERFLOW` without changing the
/// state when `A_{k+1}` would overflow.
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_solver_step(solver: *mut SfSolver) -> SfStatus {
    guard(|| {
        let s = deref_mut(solver, "solver")?;
        s.state.step(&s.problem)?;
        Ok(())
    })
}

/// Iterates until the configured criterion holds, `k` reaches `max_iter`
/// or `A_k` would overflow. `stop` may be null.
///
/// # Safety
/// `solver` must be a live handle; `stop` null or valid.
#[no_mangle]
pub unsafe extern "C" fn sf_solver_run(solver: *mut SfSolver, stop: *mut SfStopReason) -> SfStatus {
    guard(|| {
        let s = deref_mut(solver, "solver")?;
        let mut reason = SfStopReason::MaxIter;
        while s.state.k < s.config.max_iter {
            match s.state.step(&s.problem) {
                Ok(_) => {}
                Err(Error::GrowthOverflow(_)) => {
                    reason = SfStopReason::GrowthOverflow;
                    break;
                }
                Err(e) => return Err(e.into()),
            }
            if let Some(c) = &s.config.criterion {
                if bounds::check(c, &s.state, &s.problem)? {
                    reason = SfStopReason::Converged;
                    break;
                }
            }
        }
        if let Some(out) = stop.as_mut() {
            *out = reason;
        }
        Ok(())
    })
}

/// Iteration count `k`, 0 for a null handle.
///
/// # Safety
/// `solver` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_solver_iteration(solver: *const SfSolver) -> u64 {
    solver.as_ref().map_or(0, |s| s.state.k)
}

/// `A_k` and `τ_k`. Either output may be null.
///
/// # Safety
/// `solver` must be a live handle; non-null outputs valid.
#[no_mangle]
pub unsafe extern "C" fn sf_solver_coefficients(solver: *const SfSolver, big_a: *mut f64, tau: *mut f64) -> SfStatus {
    guard(|| {
        let s = &deref(solver, "solver")?.state;
        if let Some(o) = big_a.as_mut() {
            *o = s.big_a;
        }
        if let Some(o) = tau.as_mut() {
            *o = s.tau;
        }
        Ok(())
    })
}

/// Copies the output iterate `y_k` into `out` (length `n`).
///
/// # Safety
/// `solver` must be a live handle and `out` hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn sf_solver_copy_y(solver: *const SfSolver, out: *mut f64, n: usize) -> SfStatus {
    guard(|| copy_point(&deref(solver, "solver")?.state.y, out, n))
}

/// Copies the auxiliary iterate `x_k` into `out` (length `n`).
///
/// # Safety
/// `solver` must be a live handle and `out` hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn sf_solver_copy_x(solver: *const SfSolver, out: *mut f64, n: usize) -> SfStatus {
    guard(|| copy_point(&deref(solver, "solver")?.state.x, out, n))
}

/// `phi(y_k)`.
///
/// # Safety
/// `solver` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sf_solver_objective(solver: *const SfSolver, out: *mut f64) -> SfStatus {
    guard(|| {
        let s = deref(solver, "solver")?;
        let v = s.problem.eval_phi(s.state.y.view())?;
        write_out(out, v.to_f64(), "out")
    })
}

/// `||u_k||`, `||v_k||` and `eta_k`. Undefined before the first step.
///
/// # Safety
/// `solver` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sf_solver_certificates(solver: *const SfSolver, out: *mut SfCertificates) -> SfStatus {
    guard(|| {
        let s = deref(solver, "solver")?;
        let u = stationarity_residual(&s.state, &s.problem)?;
        let pair = residual_pair(&s.state)?;
        write_out(out, SfCertificates { norm_u: u.norm_u, norm_v: pair.norm_v(), eta: pair.eta }, "out")
    })
}

/// Iterations sufficient for `criterion` under the given constants.
///
/// # Safety
/// `criterion`, `inputs` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sf_predict_iterations(
    criterion: *const SfCriterion,
    inputs: *const SfBoundInputs,
    out: *mut u64,
) -> SfStatus {
    guard(|| {
        let c = deref(criterion, "criterion")?
            .to_core()
            .ok_or_else(|| Failure(SfStatus::InvalidArgument, "a criterion kind is required".into()))?;
        let i = deref(inputs, "inputs")?;
        let inp = BoundInputs { d0: i.d0, l_f: i.l_f, l_f_bar: i.l_f_bar, mu_f: i.mu_f, mu: i.mu };
        write_out(out, bounds::predict(&c, &inp)?.predicted_k, "out")
    })
}

/// Lower bound on `A_k` after `k` iterations.
#[no_mangle]
pub extern "C" fn sf_a_lower_bound(k: u64, l_f: f64, mu_f: f64, mu: f64) -> f64 {
    bounds::a_lower_bound(k, l_f, mu_f, mu)
}
