//! Approximate-solution certificates for the current iterate.
//!
//! * `u_k`: stationarity residual, `u_k ∈ ∇f(y_k) + ∂h(y_k)`.
//! * `(v_k, eta_k)`: `v_k` is an `eta_k`-subgradient of `phi - mu/2 |. - y_k|^2` at `y_k`.
//! * `Γ_k`: the averaged lower model `(1/A_k) sum a_i γ_i`, a quadratic with
//!   Hessian exactly `mu I` that minorizes `phi`.

use ndarray::{Array1, ArrayView1};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::engine::IterateState;
use crate::error::{Error, Result};
use crate::problem::{dist_sq, norm, norm_sq, CompositeProblem, ExtReal, Point};

#[derive(Debug, Clone)]
pub struct StationarityResidual {
    pub u: Point,
    pub norm_u: f64,
}

/// `u_k = ∇f(y_k) - ∇f(x̃_{k-1}) + L_f (x̃_{k-1} - y_k)`.
pub fn stationarity_residual(state: &IterateState, problem: &CompositeProblem) -> Result<StationarityResidual> {
    let (x_tilde, grad_tilde) = match (&state.x_tilde_prev, &state.grad_tilde_prev) {
        (Some(x), Some(g)) if state.k >= 1 => (x, g),
        _ => return Err(Error::UndefinedCertificate),
    };
    let grad_y = problem.f().gradient(state.y.view());
    let u = grad_y - grad_tilde + (x_tilde - &state.y) * state.l_f;
    let norm_u = norm(&u);
    Ok(StationarityResidual { u, norm_u })
}

/// `(v_k, eta_k)`; `eta` here is the residual scalar, not a tolerance.
#[derive(Debug, Clone)]
pub struct ResidualPair {
    pub v: Point,
    pub eta: f64,
}

impl ResidualPair {
    pub fn norm_v(&self) -> f64 {
        norm(&self.v)
    }
}

/// `v_k = mu (y_k - x_k) + (x_0 - x_k)/A_k`,
/// `eta_k = (|x_0 - y_k|^2 - tau_k |x_k - y_k|^2) / (2 A_k)`.
pub fn residual_pair(state: &IterateState) -> Result<ResidualPair> {
    if state.k == 0 || !(state.big_a > 0.0) {
        return Err(Error::UndefinedCertificate);
    }
    let a = state.big_a;
    let v = (&state.y - &state.x) * state.mu + (&state.x0 - &state.x) / a;
    let eta = (dist_sq(state.x0.view(), state.y.view()) - state.tau * dist_sq(state.x.view(), state.y.view())) / (2.0 * a);
    Ok(ResidualPair { v, eta })
}

/// `Γ(x) = constant + <linear, x> + (curvature/2) |x|^2`, carrying the total
/// weight it averages over.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerModel {
    pub constant: f64,
    pub linear: Point,
    pub curvature: f64,
    pub weight: f64,
}

/// Quantities from one engine step that define `γ_k`.
#[derive(Debug, Clone, Copy)]
pub struct ModelStep<'a> {
    pub a: f64,
    pub x_tilde: ArrayView1<'a, f64>,
    pub y_next: ArrayView1<'a, f64>,
    pub grad_tilde: ArrayView1<'a, f64>,
    pub f_tilde: f64,
    pub h_y_next: f64,
    pub lambda: f64,
    pub mu: f64,
    pub mu_f: f64,
}

impl LowerModel {
    /// Empty model (`A_0 = 0`).
    pub fn empty(dim: usize, mu: f64) -> Self {
        LowerModel { constant: 0.0, linear: Array1::zeros(dim), curvature: mu, weight: 0.0 }
    }

    /// `γ_k(x) = γ̃_k(y⁺) + (1/λ)<x̃ - y⁺, x - y⁺> + (mu/2)|x - y⁺|^2`, weighted by `a_k`,
    /// where `γ̃_k(y⁺) = l_f(y⁺; x̃) + h(y⁺) + (mu_f/2)|y⁺ - x̃|^2`.
    pub fn single(step: &ModelStep<'_>) -> Self {
        let d = &step.y_next - &step.x_tilde;
        let gamma_tilde = step.f_tilde + step.grad_tilde.dot(&d) + step.h_y_next + 0.5 * step.mu_f * d.dot(&d);
        let slope = (&step.x_tilde - &step.y_next) / step.lambda;
        // Expand the quadratic around the origin.
        let linear = &slope - &(&step.y_next * step.mu);
        let constant = gamma_tilde - slope.dot(&step.y_next) + 0.5 * step.mu * step.y_next.dot(&step.y_next);
        LowerModel { constant, linear, curvature: step.mu, weight: step.a }
    }

    pub fn eval(&self, x: ArrayView1<f64>) -> f64 {
        self.constant + self.linear.dot(&x) + 0.5 * self.curvature * x.dot(&x)
    }

    /// `(A Γ + a γ) / (A + a)` as a convex combination. The curvature is
    /// copied, never averaged, so it stays exactly `mu`.
    pub fn absorb(&mut self, piece: &LowerModel) {
        let total = self.weight + piece.weight;
        let w = piece.weight / total;
        self.constant += w * (piece.constant - self.constant);
        self.linear.zip_mut_with(&piece.linear, |l, &p| *l += w * (p - *l));
        self.weight = total;
    }
}

/// Pure form of [`LowerModel::absorb`] on the step's `γ_k`.
pub fn lower_model_update(model: &LowerModel, step: &ModelStep<'_>) -> LowerModel {
    let mut next = model.clone();
    next.absorb(&LowerModel::single(step));
    next
}

/// Worst violations found by [`check_eps_subgradient`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsSubgradientCheck {
    /// `max [phi(y)+<v,x-y>-eta] - [phi(x) - mu/2 |x-y|^2]`.
    pub worst_violation: f64,
    /// `max [phi(y)+<v,x-y>-eta] - [Γ(x) - mu/2 |x-y|^2]`.
    pub worst_model_violation: f64,
    /// `max Γ(x) - phi(x)`.
    pub worst_model_excess: f64,
    /// `max [phi(y) + (tau|x_k - x|^2 - |x_0 - x|^2)/(2A)] - Γ(x)`.
    pub worst_recursion_violation: f64,
    pub evaluated: usize,
    /// Samples outside `dom h` (these contribute `-inf`).
    pub skipped: usize,
}

/// Evaluates the `eta_k`-subgradient inequality and the lower-model
/// relations at each sample.
pub fn check_eps_subgradient(
    pair: &ResidualPair,
    state: &IterateState,
    problem: &CompositeProblem,
    samples: &[Point],
) -> Result<EpsSubgradientCheck> {
    if state.k == 0 {
        return Err(Error::UndefinedCertificate);
    }
    let phi_y = problem
        .phi(state.y.view())
        .finite()
        .ok_or_else(|| Error::NumericFailure("y_k outside dom h".into()))?;
    let mut out = EpsSubgradientCheck {
        worst_violation: f64::NEG_INFINITY,
        worst_model_violation: f64::NEG_INFINITY,
        worst_model_excess: f64::NEG_INFINITY,
        worst_recursion_violation: f64::NEG_INFINITY,
        evaluated: 0,
        skipped: 0,
    };
    for x in samples {
        let dy = x - &state.y;
        let lhs = phi_y + pair.v.dot(&dy) - pair.eta;
        let shift = 0.5 * state.mu * norm_sq(&dy);
        let gamma = state.model.eval(x.view());
        out.worst_model_violation = out.worst_model_violation.max(lhs - (gamma - shift));
        let recursion = phi_y
            + (state.tau * dist_sq(state.x.view(), x.view()) - dist_sq(state.x0.view(), x.view())) / (2.0 * state.big_a);
        out.worst_recursion_violation = out.worst_recursion_violation.max(recursion - gamma);
        match problem.phi(x.view()) {
            ExtReal::PosInfinity => out.skipped += 1,
            ExtReal::Finite(phi_x) => {
                out.evaluated += 1;
                out.worst_violation = out.worst_violation.max(lhs - (phi_x - shift));
                out.worst_model_excess = out.worst_model_excess.max(gamma - phi_x);
            }
        }
    }
    Ok(out)
}

/// Gaussian samples around `center`, each scaled by `s (1 + |center|)` with
/// `s` log-uniform in `[1e-4, 1]`; projected into `dom h` when `h` is an
/// indicator.
pub fn sample_points<R: Rng + ?Sized>(
    center: ArrayView1<f64>,
    problem: &CompositeProblem,
    count: usize,
    rng: &mut R,
) -> Vec<Point> {
    let base = 1.0 + center.dot(&center).sqrt();
    let step = 1.0 / problem.upper_curvature().max(f64::MIN_POSITIVE);
    (0..count)
        .map(|_| {
            let s = base * 10f64.powf(rng.random_range(-4.0..=0.0));
            let x: Point = center.iter().map(|c| c + s * rng.sample::<f64, _>(StandardNormal)).collect();
            if problem.h().is_indicator() {
                problem.h().prox(x.view(), step)
            } else {
                x
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{init, SolverConfig};
    use crate::problem::prox::ZeroFunction;
    use crate::problem::smooth::LeastSquares;
    use ndarray::array;

    fn half_square() -> CompositeProblem {
        let f = LeastSquares::with_constants(array![[1.0]], array![0.0], 0.0, 0.0, 1.0).unwrap();
        CompositeProblem::new(Box::new(f), Box::new(ZeroFunction), 1).unwrap()
    }

    fn config(l_f: f64) -> SolverConfig {
        SolverConfig { l_f, mu_f: 0.0, mu_h: 0.0, ..SolverConfig::default() }
    }

    #[test]
    fn certificates_undefined_at_k0() {
        let p = half_square();
        let s = init(&p, &config(2.0), array![1.0].view()).unwrap();
        assert!(matches!(stationarity_residual(&s, &p), Err(Error::UndefinedCertificate)));
        assert!(matches!(residual_pair(&s), Err(Error::UndefinedCertificate)));
    }

    #[test]
    fn first_step_residual_by_hand() {
        let p = half_square();
        let mut s = init(&p, &config(2.0), array![1.0].view()).unwrap();
        s.step(&p).unwrap();
        // y1 = 0.5; u1 = 0.5 - 1 + 2 * 0.5 = 0.5 = f'(y1)
        let r = stationarity_residual(&s, &p).unwrap();
        assert_eq!(r.u, array![0.5]);
        assert_eq!(r.norm_u, 0.5);
    }

    #[test]
    fn residual_vanishes_at_fixed_point() {
        let p = half_square();
        let mut s = init(&p, &config(2.0), array![0.0].view()).unwrap();
        s.step(&p).unwrap();
        assert_eq!(s.y, array![0.0]);
        assert_eq!(stationarity_residual(&s, &p).unwrap().norm_u, 0.0);
        let pair = residual_pair(&s).unwrap();
        assert_eq!(pair.v, array![0.0]);
        assert_eq!(pair.eta, 0.0);
    }

    #[test]
    fn mu_zero_pair_reduces() {
        let p = half_square();
        let mut s = init(&p, &config(3.0), array![2.0].view()).unwrap();
        for _ in 0..3 {
            s.step(&p).unwrap();
        }
        let pair = residual_pair(&s).unwrap();
        let v = (&s.x0 - &s.x) / s.big_a;
        let eta = (dist_sq(s.x0.view(), s.y.view()) - dist_sq(s.x.view(), s.y.view())) / (2.0 * s.big_a);
        assert!((pair.v[0] - v[0]).abs() < 1e-15);
        assert!((pair.eta - eta).abs() < 1e-15);
    }

    #[test]
    fn single_piece_agrees_with_definition() {
        let x_tilde = array![0.3, -1.0];
        let y_next = array![0.1, 0.4];
        let grad = array![1.5, -0.5];
        let step = ModelStep {
            a: 0.7,
            x_tilde: x_tilde.view(),
            y_next: y_next.view(),
            grad_tilde: grad.view(),
            f_tilde: 2.0,
            h_y_next: 0.25,
            lambda: 0.4,
            mu: 1.3,
            mu_f: 0.6,
        };
        let g = LowerModel::single(&step);
        let d = &y_next - &x_tilde;
        let gt = 2.0 + grad.dot(&d) + 0.25 + 0.3 * d.dot(&d);
        for x in [array![0.0, 0.0], array![1.0, -2.0], y_next.clone()] {
            let dx = &x - &y_next;
            let direct = gt + (&x_tilde - &y_next).dot(&dx) / 0.4 + 0.65 * dx.dot(&dx);
            assert!((g.eval(x.view()) - direct).abs() < 1e-12);
        }
        let first = lower_model_update(&LowerModel::empty(2, 1.3), &step);
        assert_eq!(first.weight, 0.7);
        assert!((first.eval(x_tilde.view()) - g.eval(x_tilde.view())).abs() < 1e-15);
    }
}
