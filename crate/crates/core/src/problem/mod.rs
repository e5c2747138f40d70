//! Composite problems `phi = f + h`.
//!
//! `f` is reached through a value/gradient oracle carrying its curvature
//! constants, `h` through a value/prox oracle. Neither side is differentiated
//! symbolically; everything the solver needs comes from these callbacks.

pub mod instance;
pub mod prox;
pub mod reference;
pub mod smooth;

use std::fmt;
use std::ops::Add;

use ndarray::{Array1, ArrayView1};

use crate::error::{check_dim, Error, Result};

pub use prox::{prox_box, prox_scaled_quadratic, prox_soft_threshold};

/// A point (or vector) of the ambient space.
pub type Point = Array1<f64>;

/// Real number or `+inf`, with `+inf` absorbing under addition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInfinity,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInfinity => None,
        }
    }

    /// Collapses to `f64`, mapping `+inf` to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtReal::PosInfinity
        } else {
            ExtReal::Finite(v)
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInfinity,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::Finite(rhs)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInfinity => f.write_str("inf"),
        }
    }
}

/// Differentiable `f` with known curvature constants.
///
/// For all `x, z`:
/// `l_f(x,z) + mu_bar/2 |x-z|^2 <= f(x) <= l_f(x,z) + L_bar/2 |x-z|^2`.
pub trait SmoothOracle: Send + Sync + fmt::Debug {
    fn value(&self, x: ArrayView1<f64>) -> f64;

    fn gradient(&self, x: ArrayView1<f64>) -> Point;

    /// Strong-convexity modulus `mu_bar_f`.
    fn strong_convexity(&self) -> f64;

    /// Upper-curvature constant `L_bar_f`.
    fn upper_curvature(&self) -> f64;
}

/// Closed convex `h` with a cheap proximal map.
pub trait ProxOracle: Send + Sync + fmt::Debug {
    fn value(&self, x: ArrayView1<f64>) -> ExtReal;

    /// `argmin_u { h(u) + |u - x|^2 / (2 step) }`.
    fn prox(&self, x: ArrayView1<f64>, step: f64) -> Point;

    /// Strong-convexity modulus `mu_bar_h`.
    fn strong_convexity(&self) -> f64;

    /// `h` is the indicator of a set, so prox is a projection.
    fn is_indicator(&self) -> bool {
        false
    }

    /// Largest componentwise distance from `g` to the subdifferential of `h`
    /// at `y`, when `h` is separable enough to say. `None` otherwise.
    fn subdifferential_gap(&self, _y: ArrayView1<f64>, _g: ArrayView1<f64>) -> Option<f64> {
        None
    }
}

/// Known solution of a test instance.
#[derive(Debug, Clone)]
pub struct ReferenceOptimum {
    pub phi_star: f64,
    pub x_star: Point,
}

/// `x` and base point `z` for evaluating `l_f(x, z)`.
#[derive(Debug, Clone, Copy)]
pub struct LinearizationRequest<'a> {
    pub base: ArrayView1<'a, f64>,
    pub query: ArrayView1<'a, f64>,
}

/// `phi = f + h` on `R^dim`.
#[derive(Debug)]
pub struct CompositeProblem {
    f: Box<dyn SmoothOracle>,
    h: Box<dyn ProxOracle>,
    dim: usize,
    reference: Option<ReferenceOptimum>,
}

/// Fixed-point residual a stored reference optimum has to meet.
pub const REFERENCE_RESIDUAL_TOL: f64 = 1e-8;

impl CompositeProblem {
    pub fn new(f: Box<dyn SmoothOracle>, h: Box<dyn ProxOracle>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let (mu, l) = (f.strong_convexity(), f.upper_curvature());
        if !(mu >= 0.0 && l.is_finite() && l >= mu) {
            return Err(Error::InvalidArgument(format!(
                "curvature constants must satisfy 0 <= mu_bar_f <= L_bar_f (got {mu}, {l})"
            )));
        }
        let mu_h = h.strong_convexity();
        if !(mu_h >= 0.0 && mu_h.is_finite()) {
            return Err(Error::InvalidArgument(format!("mu_bar_h must be finite and >= 0 (got {mu_h})")));
        }
        Ok(CompositeProblem { f, h, dim, reference: None })
    }

    /// Attaches a reference optimum after checking its fixed-point residual
    /// at step `1/L_bar_f`.
    pub fn with_reference(mut self, reference: ReferenceOptimum) -> Result<Self> {
        check_dim(self.dim, reference.x_star.len())?;
        let residual = self.fixed_point_residual(reference.x_star.view(), 1.0 / self.upper_curvature());
        if !(residual <= REFERENCE_RESIDUAL_TOL) {
            return Err(Error::NumericFailure(format!(
                "reference optimum has fixed-point residual {residual:e}"
            )));
        }
        self.reference = Some(reference);
        Ok(self)
    }

    pub fn f(&self) -> &dyn SmoothOracle {
        self.f.as_ref()
    }

    pub fn h(&self) -> &dyn ProxOracle {
        self.h.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn reference(&self) -> Option<&ReferenceOptimum> {
        self.reference.as_ref()
    }

    pub fn upper_curvature(&self) -> f64 {
        self.f.upper_curvature()
    }

    pub fn mu_bar_f(&self) -> f64 {
        self.f.strong_convexity()
    }

    pub fn mu_bar_h(&self) -> f64 {
        self.h.strong_convexity()
    }

    /// `phi(x) = f(x) + h(x)`.
    pub fn eval_phi(&self, x: ArrayView1<f64>) -> Result<ExtReal> {
        check_dim(self.dim, x.len())?;
        Ok(self.phi(x))
    }

    /// `l_f(x, z) = f(z) + <grad f(z), x - z>`.
    pub fn linearize_f(&self, req: LinearizationRequest<'_>) -> Result<f64> {
        check_dim(self.dim, req.base.len())?;
        check_dim(self.dim, req.query.len())?;
        Ok(self.linearization(req.query, req.base))
    }

    /// `|x - prox_h(x - t grad f(x), t)|`.
    pub fn fixed_point_residual(&self, x: ArrayView1<f64>, step: f64) -> f64 {
        let forward = &x - &(self.f.gradient(x) * step);
        let p = self.h.prox(forward.view(), step);
        norm(&(&x - &p))
    }

    pub(crate) fn phi(&self, x: ArrayView1<f64>) -> ExtReal {
        // h first: +inf short-circuits f.
        match self.h.value(x) {
            ExtReal::PosInfinity => ExtReal::PosInfinity,
            ExtReal::Finite(hv) => ExtReal::Finite(self.f.value(x) + hv),
        }
    }

    pub(crate) fn linearization(&self, x: ArrayView1<f64>, z: ArrayView1<f64>) -> f64 {
        let g = self.f.gradient(z);
        self.f.value(z) + g.dot(&(&x - &z))
    }
}

pub(crate) fn norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

pub(crate) fn norm_sq(v: &Array1<f64>) -> f64 {
    v.dot(v)
}

pub(crate) fn dist_sq(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}
