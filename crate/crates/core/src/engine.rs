//! The strongly convex FISTA iteration.
//!
//! Given `L_f > L_bar_f`, `mu_f ∈ [0, mu_bar_f]`, `mu_h ∈ [0, mu_bar_h]`, with
//! `λ = 1/(L_f - mu_f)` and `mu = mu_f + mu_h`, each step computes
//!
//! ```text
//! a_k     = (λτ_k + sqrt((λτ_k)^2 + 4λτ_k A_k)) / 2,   A_{k+1} = A_k + a_k
//! x̃_k     = (A_k y_k + a_k x_k) / A_{k+1}
//! y_{k+1} = prox_{h/L_f}(x̃_k - ∇f(x̃_k)/L_f)
//! τ_{k+1} = τ_k + mu a_k
//! x_{k+1} = [(a_k/λ)(y_{k+1} - x̃_k) + mu a_k y_{k+1} + τ_k x_k] / τ_{k+1}
//! ```
//!
//! starting from `x_0 = y_0`, `A_0 = 0`, `τ_0 = 1`.

use std::fmt;
use std::time::Instant;

use ndarray::ArrayView1;

use crate::bounds::{check, Criterion};
use crate::certificates::{LowerModel, ModelStep};
use crate::error::{check_dim, Error, Result};
use crate::problem::{CompositeProblem, Point};
use crate::trace::TraceRecord;

/// Default `L_f / L_bar_f`.
pub const DEFAULT_LF_FACTOR: f64 = 1.25;
/// `A_k` above this stops the run with [`StopReason::GrowthOverflow`].
pub const GROWTH_LIMIT: f64 = 1e300;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub l_f: f64,
    pub mu_f: f64,
    pub mu_h: f64,
    pub max_iter: u64,
    pub criterion: Option<Criterion>,
    pub trace_every: u64,
    /// Keep every `γ_i` next to the aggregated model (debugging aid).
    pub keep_model_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            l_f: 1.0,
            mu_f: 0.0,
            mu_h: 0.0,
            max_iter: 10_000,
            criterion: None,
            trace_every: 1,
            keep_model_history: false,
        }
    }
}

impl SolverConfig {
    /// `L_f = 1.25 L_bar_f` and all available strong convexity.
    pub fn for_problem(problem: &CompositeProblem) -> Self {
        SolverConfig {
            l_f: DEFAULT_LF_FACTOR * problem.upper_curvature(),
            mu_f: problem.mu_bar_f(),
            mu_h: problem.mu_bar_h(),
            ..SolverConfig::default()
        }
    }

    /// `λ = 1/(L_f - mu_f)`.
    pub fn lambda(&self) -> f64 {
        1.0 / (self.l_f - self.mu_f)
    }

    pub fn mu(&self) -> f64 {
        self.mu_f + self.mu_h
    }

    pub fn validate(&self, problem: &CompositeProblem) -> Result<()> {
        let l_bar = problem.upper_curvature();
        if !(self.l_f.is_finite() && self.l_f > l_bar) {
            return Err(Error::InvalidConfig(format!("L_f = {} must exceed L_bar_f = {l_bar}", self.l_f)));
        }
        let mu_bar_f = problem.mu_bar_f();
        if !(self.mu_f >= 0.0 && self.mu_f <= mu_bar_f) {
            return Err(Error::InvalidConfig(format!("mu_f = {} outside [0, {mu_bar_f}]", self.mu_f)));
        }
        let mu_bar_h = problem.mu_bar_h();
        if !(self.mu_h >= 0.0 && self.mu_h <= mu_bar_h) {
            return Err(Error::InvalidConfig(format!("mu_h = {} outside [0, {mu_bar_h}]", self.mu_h)));
        }
        if self.trace_every == 0 {
            return Err(Error::InvalidConfig("trace_every must be positive".into()));
        }
        if let Some(c) = &self.criterion {
            c.validate()?;
            if matches!(c, Criterion::FunctionGap { .. }) && problem.reference().is_none() {
                return Err(Error::InvalidConfig("function_gap criterion needs a reference optimum".into()));
            }
        }
        Ok(())
    }
}

/// Live iterate. Fields are public for inspection; mutate only through
/// [`IterateState::step`].
#[derive(Debug, Clone)]
pub struct IterateState {
    pub k: u64,
    pub lambda: f64,
    pub mu: f64,
    pub l_f: f64,
    pub mu_f: f64,
    /// `a_{k-1}`.
    pub a_prev: Option<f64>,
    /// `A_k`.
    pub big_a: f64,
    pub tau: f64,
    pub x: Point,
    pub y: Point,
    /// `x̃_{k-1}`.
    pub x_tilde_prev: Option<Point>,
    /// `∇f(x̃_{k-1})`, kept for the stationarity residual.
    pub grad_tilde_prev: Option<Point>,
    pub x0: Point,
    /// `Γ_k`.
    pub model: LowerModel,
    pub model_history: Option<Vec<LowerModel>>,
}

/// `(a_k, A_{k+1}, τ_{k+1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub a: f64,
    pub a_next: f64,
    pub tau_next: f64,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub y_next: Point,
    pub x_next: Point,
    pub x_tilde: Point,
    pub a: f64,
    pub a_next: f64,
    pub tau_next: f64,
}

pub fn init(problem: &CompositeProblem, config: &SolverConfig, x0: ArrayView1<f64>) -> Result<IterateState> {
    config.validate(problem)?;
    check_dim(problem.dim(), x0.len())?;
    if !problem.h().value(x0).is_finite() {
        return Err(Error::InvalidStart);
    }
    let mu = config.mu();
    Ok(IterateState {
        k: 0,
        lambda: config.lambda(),
        mu,
        l_f: config.l_f,
        mu_f: config.mu_f,
        a_prev: None,
        big_a: 0.0,
        tau: 1.0,
        x: x0.to_owned(),
        y: x0.to_owned(),
        x_tilde_prev: None,
        grad_tilde_prev: None,
        x0: x0.to_owned(),
        model: LowerModel::empty(problem.dim(), mu),
        model_history: config.keep_model_history.then(Vec::new),
    })
}

impl IterateState {
    /// Positive root of `a^2/(λτ_k) - a - A_k = 0`, written as
    /// `λτ/2 + sqrt(λτ) sqrt(λτ/4 + A)` so that nothing squares `λτ`.
    pub fn step_coefficients(&self) -> Result<Coefficients> {
        let lt = self.lambda * self.tau;
        let a = 0.5 * lt + lt.sqrt() * (0.25 * lt + self.big_a).sqrt();
        let a_next = self.big_a + a;
        if !(a_next <= GROWTH_LIMIT) {
            return Err(Error::GrowthOverflow(a_next));
        }
        Ok(Coefficients { a, a_next, tau_next: self.tau + self.mu * a })
    }

    pub fn step(&mut self, problem: &CompositeProblem) -> Result<StepOutcome> {
        let Coefficients { a, a_next, tau_next } = self.step_coefficients()?;
        let f = problem.f();
        let h = problem.h();

        // (A_k y_k + a_k x_k) / A_{k+1}, scaled first so huge A_k cannot overflow.
        let x_tilde = &self.y * (self.big_a / a_next) + &self.x * (a / a_next);
        let grad = f.gradient(x_tilde.view());
        let f_tilde = f.value(x_tilde.view());
        let forward = &x_tilde - &(&grad / self.l_f);
        let y_next = h.prox(forward.view(), 1.0 / self.l_f);
        let h_y = h
            .value(y_next.view())
            .finite()
            .ok_or_else(|| Error::NumericFailure("prox output outside dom h".into()))?;

        let r = a / tau_next;
        let x_next = (&y_next - &x_tilde) * (r / self.lambda) + &y_next * (self.mu * r) + &self.x * (self.tau / tau_next);

        let piece = LowerModel::single(&ModelStep {
            a,
            x_tilde: x_tilde.view(),
            y_next: y_next.view(),
            grad_tilde: grad.view(),
            f_tilde,
            h_y_next: h_y,
            lambda: self.lambda,
            mu: self.mu,
            mu_f: self.mu_f,
        });
        self.model.absorb(&piece);
        if let Some(history) = &mut self.model_history {
            history.push(piece);
        }

        self.k += 1;
        self.a_prev = Some(a);
        self.big_a = a_next;
        self.tau = tau_next;
        self.x = x_next.clone();
        self.y = y_next.clone();
        self.x_tilde_prev = Some(x_tilde.clone());
        self.grad_tilde_prev = Some(grad);

        Ok(StepOutcome { y_next, x_next, x_tilde, a, a_next, tau_next })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIter,
    GrowthOverflow,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Converged => "converged",
            StopReason::MaxIter => "max_iter",
            StopReason::GrowthOverflow => "growth_overflow",
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: IterateState,
    pub stop: StopReason,
    pub trace: Vec<TraceRecord>,
}

/// Iterates until the configured criterion holds, `max_iter` steps have run,
/// or `A_k` would pass [`GROWTH_LIMIT`]. Every `trace_every`-th iterate, and
/// the last one, is recorded.
pub fn run(problem: &CompositeProblem, config: &SolverConfig, x0: ArrayView1<f64>) -> Result<RunResult> {
    let started = Instant::now();
    let mut state = init(problem, config, x0)?;
    let mut trace = Vec::new();
    let mut stop = StopReason::MaxIter;

    while state.k < config.max_iter {
        match state.step(problem) {
            Ok(_) => {}
            Err(Error::GrowthOverflow(_)) => {
                stop = StopReason::GrowthOverflow;
                break;
            }
            Err(e) => return Err(e),
        }
        let converged = match &config.criterion {
            Some(c) => check(c, &state, problem)?,
            None => false,
        };
        if converged || state.k % config.trace_every == 0 {
            trace.push(TraceRecord::capture(&state, problem, started.elapsed())?);
        }
        if converged {
            stop = StopReason::Converged;
            break;
        }
    }
    if state.k > 0 && trace.last().map(|r| r.k) != Some(state.k) {
        trace.push(TraceRecord::capture(&state, problem, started.elapsed())?);
    }
    Ok(RunResult { state, stop, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::prox::ZeroFunction;
    use crate::problem::smooth::{Affine, LeastSquares};
    use ndarray::array;

    fn half_square(l_bar: f64, mu_bar: f64) -> CompositeProblem {
        let f = LeastSquares::with_constants(array![[1.0]], array![0.0], 0.0, mu_bar, l_bar).unwrap();
        CompositeProblem::new(Box::new(f), Box::new(ZeroFunction), 1).unwrap()
    }

    fn cfg(l_f: f64, mu_f: f64) -> SolverConfig {
        SolverConfig { l_f, mu_f, ..SolverConfig::default() }
    }

    #[test]
    fn init_sets_the_starting_values() {
        let p = half_square(1.0, 0.0);
        let s = init(&p, &cfg(2.0, 0.0), array![1.0].view()).unwrap();
        assert_eq!((s.k, s.big_a, s.tau, s.lambda, s.mu), (0, 0.0, 1.0, 0.5, 0.0));
        assert_eq!(s.x, s.y);
        assert!(s.a_prev.is_none() && s.x_tilde_prev.is_none());
    }

    #[test]
    fn init_rejects_bad_configs() {
        let p = half_square(1.0, 0.5);
        assert!(matches!(init(&p, &cfg(1.0, 0.0), array![1.0].view()), Err(Error::InvalidConfig(_))));
        assert!(matches!(init(&p, &cfg(0.5, 0.0), array![1.0].view()), Err(Error::InvalidConfig(_))));
        assert!(matches!(init(&p, &cfg(2.0, 0.6), array![1.0].view()), Err(Error::InvalidConfig(_))));
        let bad_mu_h = SolverConfig { mu_h: 0.1, ..cfg(2.0, 0.0) };
        assert!(matches!(init(&p, &bad_mu_h, array![1.0].view()), Err(Error::InvalidConfig(_))));
        assert!(matches!(init(&p, &cfg(2.0, 0.0), array![1.0, 2.0].view()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn init_rejects_start_outside_domain() {
        use crate::problem::prox::BoxIndicator;
        let f = LeastSquares::with_constants(array![[1.0]], array![0.0], 0.0, 0.0, 1.0).unwrap();
        let h = BoxIndicator::new(array![0.0], array![1.0]).unwrap();
        let p = CompositeProblem::new(Box::new(f), Box::new(h), 1).unwrap();
        assert!(matches!(init(&p, &cfg(2.0, 0.0), array![2.0].view()), Err(Error::InvalidStart)));
    }

    #[test]
    fn coefficient_examples() {
        let p = half_square(1.0, 1.0);
        let s = init(&p, &cfg(3.0, 1.0), array![1.0].view()).unwrap();
        // λ = 0.5, τ = 1, A = 0
        let c = s.step_coefficients().unwrap();
        assert_eq!((c.a, c.a_next), (0.5, 0.5));

        let p = half_square(1.5, 1.0);
        let conf = SolverConfig { l_f: 2.0, mu_f: 1.0, ..SolverConfig::default() };
        let s = init(&p, &conf, array![1.0].view()).unwrap();
        // λ = 1, μ = 1
        let c = s.step_coefficients().unwrap();
        assert_eq!((c.a, c.a_next, c.tau_next), (1.0, 1.0, 2.0));
    }

    #[test]
    fn tau_stays_one_without_strong_convexity() {
        let p = half_square(1.0, 0.0);
        let mut s = init(&p, &cfg(1.3, 0.0), array![4.0].view()).unwrap();
        for _ in 0..50 {
            let out = s.step(&p).unwrap();
            assert_eq!(out.tau_next, 1.0);
        }
    }

    #[test]
    fn first_step_by_hand() {
        let p = half_square(1.0, 0.0);
        let mut s = init(&p, &cfg(2.0, 0.0), array![1.0].view()).unwrap();
        let out = s.step(&p).unwrap();
        assert_eq!(out.x_tilde, array![1.0]);
        assert_eq!(out.y_next, array![0.5]);
        assert_eq!(out.x_next, array![0.5]);
        assert_eq!(out.a_next, 0.5);
        assert_eq!(s.y, s.x);
    }

    #[test]
    fn affine_f_takes_a_plain_gradient_step() {
        let f = Affine::new(array![1.0, -2.0], 0.0);
        let p = CompositeProblem::new(Box::new(f), Box::new(ZeroFunction), 2).unwrap();
        let mut s = init(&p, &cfg(4.0, 0.0), array![0.5, 0.5].view()).unwrap();
        for _ in 0..5 {
            let out = s.step(&p).unwrap();
            let expected = &out.x_tilde - &(array![1.0, -2.0] / 4.0);
            assert_eq!(out.y_next, expected);
        }
    }

    #[test]
    fn prox_weight_is_l_f() {
        let c = cfg(3.0, 0.8);
        assert!((1.0 / (2.0 * c.lambda()) + c.mu_f / 2.0 - c.l_f / 2.0).abs() < 1e-15);
    }

    #[test]
    fn max_iter_zero_returns_the_start() {
        let p = half_square(1.0, 0.0);
        let conf = SolverConfig { max_iter: 0, ..cfg(2.0, 0.0) };
        let r = run(&p, &conf, array![1.0].view()).unwrap();
        assert_eq!(r.stop, StopReason::MaxIter);
        assert_eq!(r.state.k, 0);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn geometric_growth_hits_the_overflow_guard() {
        let p = half_square(1.0, 1.0);
        let conf = SolverConfig { max_iter: 100_000, trace_every: 1000, ..cfg(1.01, 1.0) };
        let r = run(&p, &conf, array![1.0].view()).unwrap();
        assert_eq!(r.stop, StopReason::GrowthOverflow);
        assert!(r.state.big_a <= GROWTH_LIMIT && r.state.big_a.is_finite());
        assert!(r.state.y.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn model_history_is_kept_on_request() {
        let p = half_square(1.0, 0.0);
        let conf = SolverConfig { keep_model_history: true, ..cfg(2.0, 0.0) };
        let mut s = init(&p, &conf, array![1.0].view()).unwrap();
        for _ in 0..4 {
            s.step(&p).unwrap();
        }
        assert_eq!(s.model_history.as_ref().unwrap().len(), 4);
    }

    #[test]
    fn trace_records_every_nth_and_the_last() {
        let p = half_square(1.0, 0.0);
        let conf = SolverConfig { max_iter: 10, trace_every: 4, ..cfg(2.0, 0.0) };
        let r = run(&p, &conf, array![1.0].view()).unwrap();
        let ks: Vec<u64> = r.trace.iter().map(|t| t.k).collect();
        assert_eq!(ks, vec![4, 8, 10]);
    }
}
