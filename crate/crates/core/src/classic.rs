//! Classic FISTA forms for `mu = 0`, and a side-by-side check against the
//! strongly convex engine.
//!
//! With `mu = 0`, `t_k = A_{k+1}/a_k = a_k/λ` follows
//! `t_{k+1} = (1 + sqrt(1 + 4 t_k^2))/2` from `t_0 = 1`, and the
//! extrapolation is `x̃_{k+1} = y_{k+1} + (t_k - 1)/t_{k+1} (y_{k+1} - y_k)`.
//! The same sequence written with `α_k = 1/t_k` uses
//! `α_{k+1}^2 = (1 - α_{k+1}) α_k^2` and the coefficient
//! `α_k (1 - α_k)/(α_k^2 + α_{k+1})`.

use ndarray::ArrayView1;

use crate::engine::{init, SolverConfig};
use crate::error::{check_dim, Error, Result};
use crate::problem::{norm, CompositeProblem, Point};

/// `(1 + sqrt(1 + 4t^2))/2`.
pub fn t_next(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
}

/// Root in `(0, 1)` of `a'^2 = (1 - a') a^2`, in the cancellation-free form
/// `2a^2/(a^2 + sqrt(a^4 + 4a^2))`.
pub fn alpha_next(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    2.0 * a2 / (a2 + (a2 * a2 + 4.0 * a2).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleForm {
    TForm,
    AlphaForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentumSchedule {
    T(f64),
    Alpha(f64),
}

impl MomentumSchedule {
    /// `t_0 = 1` or `α_0 = 1`.
    pub fn initial(form: ScheduleForm) -> Self {
        match form {
            ScheduleForm::TForm => MomentumSchedule::T(1.0),
            ScheduleForm::AlphaForm => MomentumSchedule::Alpha(1.0),
        }
    }

    pub fn form(&self) -> ScheduleForm {
        match self {
            MomentumSchedule::T(_) => ScheduleForm::TForm,
            MomentumSchedule::Alpha(_) => ScheduleForm::AlphaForm,
        }
    }

    pub fn advance(self) -> Self {
        match self {
            MomentumSchedule::T(t) => MomentumSchedule::T(t_next(t)),
            MomentumSchedule::Alpha(a) => MomentumSchedule::Alpha(alpha_next(a)),
        }
    }

    /// Extrapolation weight from `self` (step k) to `next` (step k+1).
    pub fn momentum(&self, next: &Self) -> f64 {
        match (*self, *next) {
            (MomentumSchedule::T(t), MomentumSchedule::T(t1)) => (t - 1.0) / t1,
            (MomentumSchedule::Alpha(a), MomentumSchedule::Alpha(a1)) => a * (1.0 - a) / (a * a + a1),
            _ => panic!("momentum between schedules of different forms"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassicState {
    pub k: u64,
    pub y: Point,
    pub y_prev: Point,
    pub x_tilde: Point,
    pub schedule: MomentumSchedule,
}

impl ClassicState {
    pub fn new(x0: ArrayView1<f64>, form: ScheduleForm) -> Self {
        ClassicState {
            k: 0,
            y: x0.to_owned(),
            y_prev: x0.to_owned(),
            x_tilde: x0.to_owned(),
            schedule: MomentumSchedule::initial(form),
        }
    }
}

/// One FISTA step: prox-gradient at `x̃_k` with step `1/L_f`, then extrapolate.
pub fn classic_step(state: &mut ClassicState, problem: &CompositeProblem, config: &SolverConfig) -> Result<()> {
    if config.mu() != 0.0 {
        return Err(Error::Unsupported("classic FISTA forms are only defined for mu = 0".into()));
    }
    config.validate(problem)?;
    check_dim(problem.dim(), state.y.len())?;
    let grad = problem.f().gradient(state.x_tilde.view());
    let forward = &state.x_tilde - &(grad / config.l_f);
    let y_next = problem.h().prox(forward.view(), 1.0 / config.l_f);
    let next = state.schedule.advance();
    let beta = state.schedule.momentum(&next);
    state.x_tilde = &y_next + &((&y_next - &state.y) * beta);
    state.y_prev = std::mem::replace(&mut state.y, y_next);
    state.schedule = next;
    state.k += 1;
    Ok(())
}

/// Largest discrepancies seen while running the three forms in lockstep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EquivalenceReport {
    pub iterations: u64,
    /// `max |y^S - y^t| / max(1, |y^S|)`.
    pub y_dev_t_form: f64,
    /// Same against the α-form.
    pub y_dev_alpha_form: f64,
    /// Extrapolated points, same normalization, worst of both forms.
    pub x_tilde_dev: f64,
    /// `t_k` from the engine (`A_{k+1}/a_k` and `a_k/λ`) against the recursion, relative.
    pub t_recovery_err: f64,
    /// `|t_{k+1}^2 - t_{k+1} - t_k^2| / t_{k+1}^2`.
    pub t_residual: f64,
    /// `|α_k t_k - 1|`.
    pub alpha_t_err: f64,
    /// `y_{k+1}` against `(A_k y_k + a_k x_{k+1})/A_{k+1}`, relative.
    pub y_combination_dev: f64,
}

impl EquivalenceReport {
    /// Worst iterate deviation across both classic forms.
    pub fn max_deviation(&self) -> f64 {
        self.y_dev_t_form.max(self.y_dev_alpha_form).max(self.x_tilde_dev)
    }
}

fn rel_dev(reference: &Point, other: &Point) -> f64 {
    norm(&(reference - other)) / norm(reference).max(1.0)
}

/// Runs the engine with `mu_f = mu_h = 0` next to both classic forms from the
/// same start for `k_max` steps.
pub fn equivalence_check(
    problem: &CompositeProblem,
    x0: ArrayView1<f64>,
    l_f: f64,
    k_max: u64,
) -> Result<EquivalenceReport> {
    let config = SolverConfig { l_f, mu_f: 0.0, mu_h: 0.0, ..SolverConfig::default() };
    let mut s = init(problem, &config, x0)?;
    let mut ct = ClassicState::new(x0, ScheduleForm::TForm);
    let mut ca = ClassicState::new(x0, ScheduleForm::AlphaForm);
    let mut rep = EquivalenceReport::default();

    for _ in 0..k_max {
        let (t, alpha) = match (ct.schedule, ca.schedule) {
            (MomentumSchedule::T(t), MomentumSchedule::Alpha(a)) => (t, a),
            _ => unreachable!(),
        };
        rep.alpha_t_err = rep.alpha_t_err.max((alpha * t - 1.0).abs());

        let (big_a, y_prev) = (s.big_a, s.y.clone());
        let out = s.step(problem)?;
        rep.x_tilde_dev = rep
            .x_tilde_dev
            .max(rel_dev(&out.x_tilde, &ct.x_tilde))
            .max(rel_dev(&out.x_tilde, &ca.x_tilde));
        let t_ratio = out.a_next / out.a;
        let t_lambda = out.a / s.lambda;
        rep.t_recovery_err = rep.t_recovery_err.max(((t_ratio - t) / t).abs()).max(((t_lambda - t) / t).abs());
        let combo = (&y_prev * big_a + &out.x_next * out.a) / out.a_next;
        rep.y_combination_dev = rep.y_combination_dev.max(rel_dev(&out.y_next, &combo));

        classic_step(&mut ct, problem, &config)?;
        classic_step(&mut ca, problem, &config)?;
        rep.y_dev_t_form = rep.y_dev_t_form.max(rel_dev(&s.y, &ct.y));
        rep.y_dev_alpha_form = rep.y_dev_alpha_form.max(rel_dev(&s.y, &ca.y));

        if let MomentumSchedule::T(t1) = ct.schedule {
            rep.t_residual = rep.t_residual.max((t1 * t1 - t1 - t * t).abs() / (t1 * t1));
        }
        rep.iterations += 1;
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::prox::ZeroFunction;
    use crate::problem::smooth::LeastSquares;
    use ndarray::array;
    use proptest::prelude::*;

    const GOLDEN: f64 = 1.618_033_988_749_895;

    #[test]
    fn t_next_examples() {
        assert!((t_next(1.0) - GOLDEN).abs() < 1e-15);
        let mut t = 1.0;
        for k in 0..1000u32 {
            assert!(t >= (k as f64 + 2.0) / 2.0);
            t = t_next(t);
        }
    }

    #[test]
    fn alpha_next_examples() {
        assert!((alpha_next(1.0) - (GOLDEN - 1.0)).abs() < 1e-15);
        for t in [1.0, 2.0, 10.0] {
            assert!((alpha_next(1.0 / t) - 1.0 / t_next(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_next_is_stable_for_tiny_alpha() {
        // for tiny a the root is about a - a^2/2
        let a = 1e-9;
        let a1 = alpha_next(a);
        assert!((a1 - (a - 0.5 * a * a)).abs() <= 1e-12 * a);
    }

    #[test]
    fn first_momentum_is_zero() {
        for form in [ScheduleForm::TForm, ScheduleForm::AlphaForm] {
            let s = MomentumSchedule::initial(form);
            assert_eq!(s.momentum(&s.advance()), 0.0);
        }
    }

    fn quad() -> CompositeProblem {
        let f = LeastSquares::with_constants(array![[1.0, 0.0], [0.0, 0.5]], array![1.0, -1.0], 0.0, 0.0, 1.0).unwrap();
        CompositeProblem::new(Box::new(f), Box::new(ZeroFunction), 2).unwrap()
    }

    #[test]
    fn stagnation_kills_momentum() {
        let p = quad();
        // start at the minimizer so y_{k+1} = y_k
        let xs = array![1.0, -2.0];
        let mut s = ClassicState::new(xs.view(), ScheduleForm::TForm);
        let c = SolverConfig { l_f: 2.0, ..SolverConfig::default() };
        for _ in 0..3 {
            classic_step(&mut s, &p, &c).unwrap();
            assert_eq!(s.x_tilde, s.y);
        }
    }

    #[test]
    fn rejects_strong_convexity() {
        let p = quad();
        let mut s = ClassicState::new(array![0.0, 0.0].view(), ScheduleForm::TForm);
        let c = SolverConfig { l_f: 2.0, mu_h: 0.1, ..SolverConfig::default() };
        assert!(matches!(classic_step(&mut s, &p, &c), Err(Error::Unsupported(_))));
    }

    #[test]
    fn one_step_agrees_exactly() {
        let f = LeastSquares::with_constants(array![[1.0]], array![0.0], 0.0, 0.0, 1.0).unwrap();
        let p = CompositeProblem::new(Box::new(f), Box::new(ZeroFunction), 1).unwrap();
        let r = equivalence_check(&p, array![1.0].view(), 2.0, 1).unwrap();
        assert!(r.max_deviation() <= 1e-16);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn forms_agree_over_many_steps() {
        let p = quad();
        let r = equivalence_check(&p, array![3.0, 4.0].view(), 1.3, 200).unwrap();
        assert!(r.max_deviation() <= 1e-12, "{r:?}");
        assert!(r.t_recovery_err <= 1e-12 && r.t_residual <= 1e-15 && r.alpha_t_err <= 1e-12, "{r:?}");
        assert!(r.y_combination_dev <= 1e-12, "{r:?}");
    }

    proptest! {
        #[test]
        fn t_next_solves_its_quadratic(t in 1.0f64..1e6) {
            let t1 = t_next(t);
            prop_assert!((t1 * t1 - t1 - t * t).abs() <= 1e-12 * t1 * t1);
            prop_assert!(t1 >= t + 0.5);
        }

        #[test]
        fn alpha_next_solves_its_quadratic(a in 1e-8f64..=1.0) {
            let a1 = alpha_next(a);
            prop_assert!(a1 > 0.0 && a1 < a);
            prop_assert!((a1 * a1 - (1.0 - a1) * a * a).abs() <= 1e-12 * a * a);
        }
    }
}
