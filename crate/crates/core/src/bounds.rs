//! Stopping criteria and closed-form iteration-complexity predictors.
//!
//! Every predictor is an upper bound on the first iteration at which the
//! matching criterion holds. Logarithms are natural; `log1p_plus(x)` below is
//! `max(ln x, 1)`.

use std::fmt;
use std::str::FromStr;

use crate::certificates::{residual_pair, stationarity_residual};
use crate::engine::IterateState;
use crate::error::{Error, Result};
use crate::problem::{dist_sq, norm_sq, CompositeProblem};

/// Recorded in every [`BoundReport`].
pub const LOG_BASE: &str = "e";

/// Relative slack used when snapping a bound that is an integer up to
/// rounding (e.g. `2 sqrt(4) = 4.000000000000001`).
const CEIL_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    /// `phi(y_k) - phi* <= eps_bar`. Needs a reference optimum.
    FunctionGap { eps_bar: f64 },
    /// `||u_k|| <= rho`.
    Stationarity { rho: f64 },
    /// `||v_k||^2 + 2 eta_k <= sigma_tilde ||y_k - x_0||^2`.
    Relative { sigma_tilde: f64 },
    /// `||v_k||^2 + 2 eta_k <= sigma ||v_k + y_k - x_0||^2`.
    AlternateRelative { sigma: f64 },
    /// `||v_k|| <= eps` and `eta_k <= eta_tol`.
    Absolute { eps: f64, eta_tol: f64 },
}

impl Criterion {
    pub fn name(&self) -> &'static str {
        match self {
            Criterion::FunctionGap { .. } => "function_gap",
            Criterion::Stationarity { .. } => "stationarity",
            Criterion::Relative { .. } => "relative",
            Criterion::AlternateRelative { .. } => "alternate_relative",
            Criterion::Absolute { .. } => "absolute",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let tolerances: &[(&str, f64)] = match self {
            Criterion::FunctionGap { eps_bar } => &[("eps_bar", *eps_bar)],
            Criterion::Stationarity { rho } => &[("rho", *rho)],
            Criterion::Relative { sigma_tilde } => &[("sigma_tilde", *sigma_tilde)],
            Criterion::AlternateRelative { sigma } => &[("sigma", *sigma)],
            Criterion::Absolute { eps, eta_tol } => &[("eps", *eps), ("eta_tol", *eta_tol)],
        };
        for (name, v) in tolerances {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Criterion names without tolerances, as accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionKind {
    FunctionGap,
    Stationarity,
    Relative,
    AlternateRelative,
    Absolute,
}

impl FromStr for CriterionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "function_gap" => CriterionKind::FunctionGap,
            "stationarity" => CriterionKind::Stationarity,
            "relative" => CriterionKind::Relative,
            "alternate_relative" => CriterionKind::AlternateRelative,
            "absolute" => CriterionKind::Absolute,
            other => return Err(Error::Parse(format!("unknown criterion {other:?}"))),
        })
    }
}

/// True iff the criterion holds at the current iterate.
pub fn check(criterion: &Criterion, state: &IterateState, problem: &CompositeProblem) -> Result<bool> {
    match *criterion {
        Criterion::FunctionGap { eps_bar } => {
            let reference = problem
                .reference()
                .ok_or_else(|| Error::InvalidConfig("function_gap criterion needs a reference optimum".into()))?;
            let phi = problem.phi(state.y.view());
            Ok(phi.is_finite() && phi.to_f64() - reference.phi_star <= eps_bar)
        }
        Criterion::Stationarity { rho } => Ok(stationarity_residual(state, problem)?.norm_u <= rho),
        Criterion::Relative { sigma_tilde } => {
            let pair = residual_pair(state)?;
            let lhs = norm_sq(&pair.v) + 2.0 * pair.eta;
            Ok(lhs <= sigma_tilde * dist_sq(state.y.view(), state.x0.view()))
        }
        Criterion::AlternateRelative { sigma } => {
            let pair = residual_pair(state)?;
            let lhs = norm_sq(&pair.v) + 2.0 * pair.eta;
            let w = &pair.v + &state.y - &state.x0;
            Ok(lhs <= sigma * norm_sq(&w))
        }
        Criterion::Absolute { eps, eta_tol } => {
            let pair = residual_pair(state)?;
            Ok(pair.norm_v() <= eps && pair.eta <= eta_tol)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Polynomial,
    Logarithmic,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Polynomial => "polynomial",
            Branch::Logarithmic => "logarithmic",
        })
    }
}

/// Raw branch values and the rounded minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterEstimate {
    pub k: u64,
    pub branch: Branch,
    pub polynomial: f64,
    /// `None` when `mu = 0`.
    pub logarithmic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub criterion: Criterion,
    pub predicted_k: u64,
    pub branch: Branch,
    pub polynomial: f64,
    pub logarithmic: Option<f64>,
    /// Target value of `A_k` when the bound goes through it.
    pub a_bar: Option<f64>,
    pub zeta: Option<f64>,
    pub c: Option<f64>,
    pub big_m: Option<f64>,
    pub cal_a: Option<f64>,
    pub sigma_tilde: Option<f64>,
    pub log_base: &'static str,
}

impl BoundReport {
    fn new(criterion: Criterion, est: IterEstimate) -> Self {
        BoundReport {
            criterion,
            predicted_k: est.k,
            branch: est.branch,
            polynomial: est.polynomial,
            logarithmic: est.logarithmic,
            a_bar: None,
            zeta: None,
            c: None,
            big_m: None,
            cal_a: None,
            sigma_tilde: None,
            log_base: LOG_BASE,
        }
    }

    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        line("criterion", self.criterion.name().to_string());
        line("predicted_k", self.predicted_k.to_string());
        line("branch", self.branch.to_string());
        line("polynomial", fmt_real(self.polynomial));
        line("logarithmic", self.logarithmic.map_or_else(|| "disabled".into(), fmt_real));
        for (k, v) in [
            ("a_bar", self.a_bar),
            ("zeta", self.zeta),
            ("c", self.c),
            ("big_m", self.big_m),
            ("cal_a", self.cal_a),
            ("sigma_tilde", self.sigma_tilde),
        ] {
            if let Some(v) = v {
                line(k, fmt_real(v));
            }
        }
        line("log_base", self.log_base.into());
        out
    }
}

fn fmt_real(v: f64) -> String {
    crate::problem::instance::format_real(v)
}

/// `max(ln x, 1)`.
pub fn log1p_plus(x: f64) -> f64 {
    x.ln().max(1.0)
}

/// Ceiling that treats values within `CEIL_SNAP` of an integer as that
/// integer, clamped to at least one.
fn ceil_at_least_one(x: f64) -> u64 {
    if x.is_nan() {
        return u64::MAX;
    }
    let r = x.round();
    let v = if (x - r).abs() <= CEIL_SNAP * r.abs().max(1.0) { r } else { x.ceil() };
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        (v as u64).max(1)
    }
}

fn pick(polynomial: f64, logarithmic: Option<f64>) -> IterEstimate {
    let (raw, branch) = match logarithmic {
        Some(l) if l < polynomial => (l, Branch::Logarithmic),
        _ => (polynomial, Branch::Polynomial),
    };
    IterEstimate { k: ceil_at_least_one(raw), branch, polynomial, logarithmic }
}

fn kappa(l_f: f64, mu_f: f64) -> Result<f64> {
    let k = l_f - mu_f;
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidConfig(format!("need L_f > mu_f, got L_f = {l_f}, mu_f = {mu_f}")));
    }
    Ok(k)
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::InvalidConfig(format!("mu must be nonnegative, got {mu}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn check_d0(d0: f64) -> Result<()> {
    if !(d0.is_finite() && d0 >= 0.0) {
        return Err(Error::InvalidArgument(format!("d0 must be nonnegative, got {d0}")));
    }
    Ok(())
}

/// Geometric growth factor `c = 1 + sqrt(mu/(L_f - mu_f))/2`.
pub fn growth_factor(l_f: f64, mu_f: f64, mu: f64) -> f64 {
    1.0 + 0.5 * (mu / (l_f - mu_f)).sqrt()
}

/// Lower bound on `A_k`: `max{k^2/4, c^(2(k-1))}/(L_f - mu_f)`.
pub fn a_lower_bound(k: u64, l_f: f64, mu_f: f64, mu: f64) -> f64 {
    let kf = k as f64;
    let c = growth_factor(l_f, mu_f, mu);
    let geometric = (2.0 * (kf - 1.0) * c.ln()).exp();
    (0.25 * kf * kf).max(geometric) / (l_f - mu_f)
}

/// Iterations after which `A_k >= a_target` is guaranteed, with both branches.
pub fn estimate_iters_for_a(a_target: f64, l_f: f64, mu_f: f64, mu: f64) -> Result<IterEstimate> {
    let kap = kappa(l_f, mu_f)?;
    check_mu(mu)?;
    if a_target.is_nan() || a_target < 0.0 {
        return Err(Error::InvalidArgument(format!("A target must be nonnegative, got {a_target}")));
    }
    let polynomial = 2.0 * (kap * a_target).sqrt();
    let logarithmic = (mu > 0.0).then(|| (0.5 + (kap / mu).sqrt()) * log1p_plus(kap * a_target) + 1.0);
    Ok(pick(polynomial, logarithmic))
}

pub fn iters_for_a(a_target: f64, l_f: f64, mu_f: f64, mu: f64) -> Result<u64> {
    Ok(estimate_iters_for_a(a_target, l_f, mu_f, mu)?.k)
}

pub fn bound_function_gap(d0: f64, eps_bar: f64, l_f: f64, mu_f: f64, mu: f64) -> Result<BoundReport> {
    check_d0(d0)?;
    check_positive("eps_bar", eps_bar)?;
    let a_bar = d0 * d0 / (2.0 * eps_bar);
    let mut r = BoundReport::new(Criterion::FunctionGap { eps_bar }, estimate_iters_for_a(a_bar, l_f, mu_f, mu)?);
    r.a_bar = Some(a_bar);
    r.c = Some(growth_factor(l_f, mu_f, mu));
    Ok(r)
}

/// `zeta = 8 L_f^2 (L_f - mu_f)/(L_f - L_bar_f)`.
pub fn zeta(l_f: f64, l_f_bar: f64, mu_f: f64) -> Result<f64> {
    let kap = kappa(l_f, mu_f)?;
    if !(l_f > l_f_bar) {
        return Err(Error::InvalidConfig(format!("L_f = {l_f} must exceed L_bar_f = {l_f_bar}")));
    }
    Ok(8.0 * l_f * l_f * kap / (l_f - l_f_bar))
}

pub fn bound_stationarity(d0: f64, rho: f64, l_f: f64, l_f_bar: f64, mu_f: f64, mu: f64) -> Result<BoundReport> {
    check_d0(d0)?;
    check_positive("rho", rho)?;
    check_mu(mu)?;
    let z = zeta(l_f, l_f_bar, mu_f)?;
    let kap = l_f - mu_f;
    let ratio = d0 * d0 / (rho * rho);
    let polynomial = (12.0 * z * ratio).cbrt();
    let logarithmic = (mu > 0.0).then(|| {
        // c^2 - 1 = s + s^2/4 with s = sqrt(mu/kap), without cancellation
        let s = (mu / kap).sqrt();
        (1.0 + 2.0 * (kap / mu).sqrt()) * (z * (s + 0.25 * s * s) * ratio).ln_1p()
    });
    let mut r = BoundReport::new(Criterion::Stationarity { rho }, pick(polynomial, logarithmic));
    r.zeta = Some(z);
    r.c = Some(growth_factor(l_f, mu_f, mu));
    Ok(r)
}

/// Largest root of `sigma_tilde A^2 - (2 mu + 1) A - 4 = 0`.
pub fn abar_relative(mu: f64, sigma_tilde: f64) -> Result<f64> {
    check_mu(mu)?;
    check_positive("sigma_tilde", sigma_tilde)?;
    let b = 2.0 * mu + 1.0;
    Ok((b + (b * b + 16.0 * sigma_tilde).sqrt()) / (2.0 * sigma_tilde))
}

pub fn bound_relative(mu: f64, sigma_tilde: f64, l_f: f64, mu_f: f64) -> Result<BoundReport> {
    let a_bar = abar_relative(mu, sigma_tilde)?;
    let mut r = BoundReport::new(Criterion::Relative { sigma_tilde }, estimate_iters_for_a(a_bar, l_f, mu_f, mu)?);
    r.a_bar = Some(a_bar);
    r.sigma_tilde = Some(sigma_tilde);
    Ok(r)
}

/// `sigma/(1 + sqrt(sigma))^2`.
pub fn sigma_tilde_from_sigma(sigma: f64) -> f64 {
    let s = 1.0 + sigma.sqrt();
    sigma / (s * s)
}

/// `(2 mu + 3)(1 + sqrt(sigma))^2/sigma`.
pub fn cal_a(mu: f64, sigma: f64) -> f64 {
    let s = 1.0 + sigma.sqrt();
    (2.0 * mu + 3.0) * s * s / sigma
}

pub fn bound_alternate_relative(mu: f64, sigma: f64, l_f: f64, mu_f: f64) -> Result<BoundReport> {
    check_mu(mu)?;
    check_positive("sigma", sigma)?;
    let big = cal_a(mu, sigma);
    let st = sigma_tilde_from_sigma(sigma);
    let a_bar = abar_relative(mu, st)?;
    if a_bar > big * (1.0 + 1e-12) {
        return Err(Error::NumericFailure(format!("A_bar = {a_bar} exceeds cal_A = {big}")));
    }
    let mut r =
        BoundReport::new(Criterion::AlternateRelative { sigma }, estimate_iters_for_a(big, l_f, mu_f, mu)?);
    r.cal_a = Some(big);
    r.a_bar = Some(a_bar);
    r.sigma_tilde = Some(st);
    Ok(r)
}

/// `M = (1 + 8(L_f - mu_f)/mu)^2 (L_f - mu_f)`.
pub fn big_m(l_f: f64, mu_f: f64, mu: f64) -> Result<f64> {
    let kap = kappa(l_f, mu_f)?;
    if !(mu > 0.0) {
        return Err(Error::UnsupportedBound("the absolute-tolerance bound needs mu > 0".into()));
    }
    let q = 1.0 + 8.0 * kap / mu;
    Ok(q * q * kap)
}

/// `A_k` beyond which `||v_k|| <= eps` and `eta_k <= eta_tol` are guaranteed.
pub fn absolute_sufficient_a(d0: f64, eps: f64, eta_tol: f64, l_f: f64, mu_f: f64, mu: f64) -> Result<f64> {
    big_m(l_f, mu_f, mu)?;
    let q = 1.0 + 8.0 * (l_f - mu_f) / mu;
    Ok(8.0 / eps * q * d0 + (16.0 * mu / (eps * eps) + 2.0 / eta_tol) * q * q * d0 * d0)
}

pub fn bound_absolute(d0: f64, eps: f64, eta_tol: f64, l_f: f64, mu_f: f64, mu: f64) -> Result<BoundReport> {
    check_d0(d0)?;
    check_positive("eps", eps)?;
    check_positive("eta_tol", eta_tol)?;
    let m = big_m(l_f, mu_f, mu)?;
    let kap = l_f - mu_f;
    let polynomial = 8.0 * (1.0 / eps.sqrt() + (mu * d0).sqrt() / eps + d0.sqrt() / eta_tol.sqrt()) * (m * d0).sqrt();
    let inner = 16.0 * (1.0 / eps + mu * d0 / (eps * eps) + d0 / eta_tol) * m * d0;
    let logarithmic = (0.5 + (kap / mu).sqrt()) * log1p_plus(inner) + 1.0;
    let mut r = BoundReport::new(Criterion::Absolute { eps, eta_tol }, pick(polynomial, Some(logarithmic)));
    r.big_m = Some(m);
    r.c = Some(growth_factor(l_f, mu_f, mu));
    Ok(r)
}

/// Constants a predictor may need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub d0: f64,
    pub l_f: f64,
    pub l_f_bar: f64,
    pub mu_f: f64,
    pub mu: f64,
}

/// Dispatches to the predictor matching `criterion`.
pub fn predict(criterion: &Criterion, inp: &BoundInputs) -> Result<BoundReport> {
    criterion.validate()?;
    match *criterion {
        Criterion::FunctionGap { eps_bar } => bound_function_gap(inp.d0, eps_bar, inp.l_f, inp.mu_f, inp.mu),
        Criterion::Stationarity { rho } => bound_stationarity(inp.d0, rho, inp.l_f, inp.l_f_bar, inp.mu_f, inp.mu),
        Criterion::Relative { sigma_tilde } => bound_relative(inp.mu, sigma_tilde, inp.l_f, inp.mu_f),
        Criterion::AlternateRelative { sigma } => bound_alternate_relative(inp.mu, sigma, inp.l_f, inp.mu_f),
        Criterion::Absolute { eps, eta_tol } => bound_absolute(inp.d0, eps, eta_tol, inp.l_f, inp.mu_f, inp.mu),
    }
}
