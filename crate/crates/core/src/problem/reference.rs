//! Plain proximal-gradient reference solver.
//!
//! Deliberately unaccelerated and independent of the engine: its output
//! defines `phi*`, `x*` and `d0` for test instances.

use ndarray::ArrayView1;

use super::{norm, CompositeProblem, Point};
use crate::error::{check_dim, Error, Result};

pub const REFERENCE_FIXED_POINT_TOL: f64 = 1e-14;
pub const REFERENCE_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub phi_star: f64,
    pub x_star: Point,
    pub iterations: usize,
    /// Last fixed-point residual `|x - prox(x - t grad f(x), t)|`, `t = 1/L_bar_f`.
    pub residual: f64,
}

impl ReferenceSolution {
    /// `d0 = |x0 - x*|`.
    pub fn d0(&self, x0: ArrayView1<f64>) -> f64 {
        norm(&(&x0 - &self.x_star))
    }
}

/// Runs `x <- prox_h(x - grad f(x)/L_bar, 1/L_bar)` from `x0` until the step
/// length is at most `REFERENCE_FIXED_POINT_TOL` or `REFERENCE_MAX_ITER`
/// iterations have run.
pub fn reference_solve(problem: &CompositeProblem, x0: ArrayView1<f64>) -> Result<ReferenceSolution> {
    check_dim(problem.dim(), x0.len())?;
    let l_bar = problem.upper_curvature();
    if !(l_bar > 0.0) {
        return Err(Error::InvalidArgument("reference solve needs L_bar_f > 0".into()));
    }
    let t = 1.0 / l_bar;
    let f = problem.f();
    let h = problem.h();

    let mut x = h.prox(x0, t);
    let mut residual = f64::INFINITY;
    for it in 1..=REFERENCE_MAX_ITER {
        let forward = &x - &(f.gradient(x.view()) * t);
        let next = h.prox(forward.view(), t);
        residual = norm(&(&next - &x));
        x = next;
        if !residual.is_finite() {
            break;
        }
        if residual <= REFERENCE_FIXED_POINT_TOL {
            let phi_star = problem
                .phi(x.view())
                .finite()
                .ok_or_else(|| Error::NumericFailure("reference point left dom h".into()))?;
            return Ok(ReferenceSolution { phi_star, x_star: x, iterations: it, residual });
        }
    }
    Err(Error::NumericFailure(format!(
        "reference solve stopped with fixed-point residual {residual:e}"
    )))
}
