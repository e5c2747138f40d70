//! Smooth terms `f` with gradient oracles and curvature constants.

use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::{Point, SmoothOracle};
use crate::error::{check_dim, Error, Result};

/// Relative accuracy the power iteration targets for the top eigenvalue.
pub const POWER_ITERATION_TOL: f64 = 1e-10;
pub const POWER_ITERATION_MAX: usize = 100_000;
/// Safety factor applied to the computed top eigenvalue.
pub const CURVATURE_INFLATION: f64 = 1.0 + 1e-9;

const POWER_START_SEED: u64 = 0x5eed_cafe_f00d_d00d;

/// Largest eigenvalue of a symmetric positive semidefinite operator given
/// by its action `apply` on `R^n`.
///
/// Stops once the extrapolated remaining error of the Rayleigh quotient,
/// estimated from the ratio of successive increments, drops below
/// `POWER_ITERATION_TOL` relative.
pub fn largest_eigenvalue<F>(apply: F, n: usize) -> Result<f64>
where
    F: Fn(ArrayView1<f64>) -> Array1<f64>,
{
    if n == 0 {
        return Err(Error::InvalidArgument("empty operator".into()));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(POWER_START_SEED);
    let mut v: Array1<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    v /= v.dot(&v).sqrt();

    let mut theta_prev = f64::NAN;
    let mut delta_prev = f64::NAN;
    for _ in 0..POWER_ITERATION_MAX {
        let w = apply(v.view());
        let theta = v.dot(&w);
        let w_norm = w.dot(&w).sqrt();
        if w_norm == 0.0 {
            return Ok(0.0);
        }
        if !w_norm.is_finite() {
            return Err(Error::NumericFailure("power iteration diverged".into()));
        }
        v = w / w_norm;

        let delta = theta - theta_prev;
        if delta.abs() <= 4.0 * f64::EPSILON * theta.abs() {
            return Ok(theta);
        }
        let ratio = delta / delta_prev;
        if ratio > 0.0 && ratio < 1.0 && delta.abs() * ratio / (1.0 - ratio) <= POWER_ITERATION_TOL * theta.abs() {
            return Ok(theta);
        }
        theta_prev = theta;
        delta_prev = delta;
    }
    Err(Error::NumericFailure(format!(
        "power iteration did not converge in {POWER_ITERATION_MAX} iterations"
    )))
}

/// `f(x) = 1/2 |Ax - b|^2 + (ridge/2) |x|^2`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    a: Array2<f64>,
    b: Array1<f64>,
    ridge: f64,
    mu_bar: f64,
    l_bar: f64,
}

impl LeastSquares {
    /// Computes `L_bar` by power iteration on `A^T A + ridge I`; `mu_bar = ridge`.
    pub fn new(a: Array2<f64>, b: Array1<f64>, ridge: f64) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        if !(ridge >= 0.0 && ridge.is_finite()) {
            return Err(Error::InvalidArgument(format!("ridge must be finite and >= 0 (got {ridge})")));
        }
        let top = largest_eigenvalue(|v| a.t().dot(&a.dot(&v)) + &v * ridge, a.ncols())?;
        let l_bar = top * CURVATURE_INFLATION;
        Ok(LeastSquares { a, b, ridge, mu_bar: ridge, l_bar })
    }

    /// Uses caller-supplied curvature constants.
    pub fn with_constants(a: Array2<f64>, b: Array1<f64>, ridge: f64, mu_bar: f64, l_bar: f64) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        if !(mu_bar >= 0.0 && l_bar >= mu_bar && l_bar.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= mu_bar <= L_bar (got {mu_bar}, {l_bar})"
            )));
        }
        Ok(LeastSquares { a, b, ridge, mu_bar, l_bar })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn rhs(&self) -> &Array1<f64> {
        &self.b
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }
}

impl SmoothOracle for LeastSquares {
    fn value(&self, x: ArrayView1<f64>) -> f64 {
        let r = self.a.dot(&x) - &self.b;
        0.5 * r.dot(&r) + 0.5 * self.ridge * x.dot(&x)
    }

    fn gradient(&self, x: ArrayView1<f64>) -> Point {
        let r = self.a.dot(&x) - &self.b;
        self.a.t().dot(&r) + &x * self.ridge
    }

    fn strong_convexity(&self) -> f64 {
        self.mu_bar
    }

    fn upper_curvature(&self) -> f64 {
        self.l_bar
    }
}

/// `f(x) = 1/2 x^T Q x + <c, x>` with `Q` symmetric positive semidefinite.
#[derive(Debug, Clone)]
pub struct Quadratic {
    q: Array2<f64>,
    c: Array1<f64>,
    mu_bar: f64,
    l_bar: f64,
}

impl Quadratic {
    /// `mu_bar` is the caller's known lower bound on the spectrum of `Q`;
    /// `L_bar` comes from power iteration.
    pub fn new(q: Array2<f64>, c: Array1<f64>, mu_bar: f64) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::InvalidArgument("Q must be square".into()));
        }
        check_dim(q.nrows(), c.len())?;
        let top = largest_eigenvalue(|v| q.dot(&v), q.nrows())?;
        let l_bar = top * CURVATURE_INFLATION;
        if !(mu_bar >= 0.0 && mu_bar <= l_bar) {
            return Err(Error::InvalidArgument(format!("mu_bar {mu_bar} outside [0, {l_bar}]")));
        }
        Ok(Quadratic { q, c, mu_bar, l_bar })
    }

    /// Diagonal `Q`; `mu_bar` is the smallest diagonal entry.
    pub fn diagonal(d: Array1<f64>, c: Array1<f64>) -> Result<Self> {
        if d.iter().any(|&di| !(di >= 0.0)) {
            return Err(Error::InvalidArgument("diagonal entries must be >= 0".into()));
        }
        let mu_bar = d.iter().copied().fold(f64::INFINITY, f64::min);
        Quadratic::new(Array2::from_diag(&d), c, mu_bar)
    }

    pub fn hessian(&self) -> &Array2<f64> {
        &self.q
    }

    pub fn linear(&self) -> &Array1<f64> {
        &self.c
    }
}

impl SmoothOracle for Quadratic {
    fn value(&self, x: ArrayView1<f64>) -> f64 {
        0.5 * x.dot(&self.q.dot(&x)) + self.c.dot(&x)
    }

    fn gradient(&self, x: ArrayView1<f64>) -> Point {
        self.q.dot(&x) + &self.c
    }

    fn strong_convexity(&self) -> f64 {
        self.mu_bar
    }

    fn upper_curvature(&self) -> f64 {
        self.l_bar
    }
}

/// `f(x) = (1/m) sum_i log(1 + exp(-b_i <a_i, x>)) + (ridge/2) |x|^2`, labels `b_i = ±1`.
#[derive(Debug, Clone)]
pub struct Logistic {
    a: Array2<f64>,
    labels: Array1<f64>,
    ridge: f64,
    l_bar: f64,
}

fn softplus(t: f64) -> f64 {
    // log(1 + e^t) without overflow
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl Logistic {
    /// `L_bar` from power iteration on `A^T A / (4m) + ridge I`.
    pub fn new(a: Array2<f64>, labels: Array1<f64>, ridge: f64) -> Result<Self> {
        check_dim(a.nrows(), labels.len())?;
        if labels.iter().any(|&l| l != 1.0 && l != -1.0) {
            return Err(Error::InvalidArgument("labels must be +1 or -1".into()));
        }
        if !(ridge >= 0.0 && ridge.is_finite()) {
            return Err(Error::InvalidArgument(format!("ridge must be finite and >= 0 (got {ridge})")));
        }
        let scale = 0.25 / a.nrows() as f64;
        let top = largest_eigenvalue(|v| a.t().dot(&a.dot(&v)) * scale + &v * ridge, a.ncols())?;
        Ok(Logistic { a, labels, ridge, l_bar: top * CURVATURE_INFLATION })
    }
}

impl SmoothOracle for Logistic {
    fn value(&self, x: ArrayView1<f64>) -> f64 {
        let margins = self.a.dot(&x) * &self.labels;
        let loss: f64 = margins.iter().map(|&z| softplus(-z)).sum();
        loss / self.a.nrows() as f64 + 0.5 * self.ridge * x.dot(&x)
    }

    fn gradient(&self, x: ArrayView1<f64>) -> Point {
        let m = self.a.nrows() as f64;
        let margins = self.a.dot(&x) * &self.labels;
        let weights: Array1<f64> = margins
            .iter()
            .zip(self.labels.iter())
            .map(|(&z, &l)| -l * sigmoid(-z) / m)
            .collect();
        self.a.t().dot(&weights) + &x * self.ridge
    }

    fn strong_convexity(&self) -> f64 {
        self.ridge
    }

    fn upper_curvature(&self) -> f64 {
        self.l_bar
    }
}

/// `f(x) = <c, x> + d`.
#[derive(Debug, Clone)]
pub struct Affine {
    c: Array1<f64>,
    d: f64,
}

impl Affine {
    pub fn new(c: Array1<f64>, d: f64) -> Self {
        Affine { c, d }
    }
}

impl SmoothOracle for Affine {
    fn value(&self, x: ArrayView1<f64>) -> f64 {
        self.c.dot(&x) + self.d
    }

    fn gradient(&self, _x: ArrayView1<f64>) -> Point {
        self.c.clone()
    }

    fn strong_convexity(&self) -> f64 {
        0.0
    }

    fn upper_curvature(&self) -> f64 {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn power_iteration_on_diagonal_spectrum() {
        let n = 200;
        let d: Array1<f64> = (1..=n).map(|i| i as f64).collect();
        let top = largest_eigenvalue(|v| &v * &d, n).unwrap();
        assert!((top - n as f64).abs() <= 1e-9 * n as f64, "top = {top}");
    }

    #[test]
    fn power_iteration_zero_operator() {
        assert_eq!(largest_eigenvalue(|v| &v * 0.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn power_iteration_matches_dense_eigensolver() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        let (m, n) = (30, 12);
        let a = Array2::from_shape_fn((m, n), |_| rng.random_range(-1.0..1.0));
        let ata = a.t().dot(&a);
        let dense = nalgebra::DMatrix::from_fn(n, n, |i, j| ata[[i, j]]);
        let expected = dense.symmetric_eigen().eigenvalues.max();
        let top = largest_eigenvalue(|v| ata.dot(&v), n).unwrap();
        assert!((top - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let a = array![[1.0, -2.0], [0.5, 0.3], [-1.5, 2.0]];
        let f = Logistic::new(a, array![1.0, -1.0, 1.0], 0.2).unwrap();
        let x = array![0.3, -0.7];
        let g = f.gradient(x.view());
        let h = 1e-6;
        for i in 0..2 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (f.value(xp.view()) - f.value(xm.view())) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-8, "{fd} vs {}", g[i]);
        }
    }

    #[test]
    fn softplus_is_stable() {
        assert_eq!(softplus(-1000.0), 0.0);
        assert_eq!(softplus(1000.0), 1000.0);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn ridge_sets_mu_bar_exactly() {
        let a = array![[1.0, 2.0], [3.0, 4.0]];
        let f = LeastSquares::new(a, array![1.0, 1.0], 0.37).unwrap();
        assert_eq!(f.strong_convexity(), 0.37);
        assert!(f.upper_curvature() > 0.37);
    }
}
