//! Numerical verification of the solver's guarantees: per-iteration
//! identities and inequalities, equivalence of the classic forms, and the
//! validity of the iteration-count predictors on seeded suites.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use ndarray::{Array1, ArrayView1};
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::bounds::{a_lower_bound, abar_relative, check, growth_factor, predict, BoundInputs, Criterion};
use crate::certificates::{check_eps_subgradient, residual_pair, sample_points, stationarity_residual};
use crate::classic::equivalence_check;
use crate::engine::{init, run, SolverConfig, StopReason};
use crate::error::{Error, Result};
use crate::problem::instance::{format_real, InstanceKind, InstanceParams, InstanceSpec};
use crate::problem::{dist_sq, norm, norm_sq, CompositeProblem, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Largest observed excess; the check passes when it is at most `tolerance`.
    pub worst_violation: f64,
    pub tolerance: f64,
    /// Iteration where the worst value was seen.
    pub location: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn overall(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    /// One `name = pass|fail ...` line per check and a final `overall` line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = write!(
                s,
                "{} = {} worst={} tol={}",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                format_real(c.worst_violation),
                format_real(c.tolerance)
            );
            if let Some(k) = c.location {
                let _ = write!(s, " k={k}");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "overall = {}", if self.overall() { "pass" } else { "fail" });
        s
    }
}

/// Running maximum of one quantity against a fixed tolerance.
struct Tracker {
    name: String,
    tol: f64,
    worst: f64,
    at: Option<u64>,
}

impl Tracker {
    fn new(name: impl Into<String>, tol: f64) -> Self {
        Tracker { name: name.into(), tol, worst: f64::NEG_INFINITY, at: None }
    }

    fn observe(&mut self, value: f64, k: u64) {
        // NaN must fail, so it always replaces the current worst.
        if (value.is_nan() || value > self.worst || self.at.is_none()) && !self.worst.is_nan() {
            self.worst = value;
            self.at = Some(k);
        }
    }

    fn finish(self) -> Option<Check> {
        let at = self.at?;
        Some(Check {
            passed: self.worst <= self.tol,
            name: self.name,
            worst_violation: self.worst,
            tolerance: self.tol,
            location: Some(at),
        })
    }
}

/// Multiple of `eps * conditioning` tolerated in the certificate identity.
const ROUNDING_FACTOR: f64 = 64.0;

fn rel(err: f64, scale: f64) -> f64 {
    err.abs() / scale.abs().max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone)]
pub struct InvariantOptions {
    pub iters: u64,
    /// Iterations at which the sampled lower-model checks run.
    pub checkpoints: Vec<u64>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for InvariantOptions {
    fn default() -> Self {
        InvariantOptions { iters: 2000, checkpoints: vec![1, 10, 100, 1000], samples: 1000, seed: 0 }
    }
}

/// Tolerances used by [`verify_invariants`].
pub mod tol {
    pub const COEFFICIENT_IDENTITY: f64 = 1e-10;
    pub const TAU_IDENTITY: f64 = 1e-10;
    pub const A_LOWER_BOUND: f64 = 1e-10;
    /// Scaled by `1 + |phi*|`.
    pub const GAP_SLACK: f64 = 1e-9;
    pub const DISTANCE: f64 = 1e-9;
    pub const CERTIFICATE_IDENTITY: f64 = 1e-8;
    pub const ETA_FLOOR: f64 = 1e-12;
    /// Scaled by `1 + |phi(y_k)|`.
    pub const EPS_SUBGRADIENT: f64 = 1e-8;
    pub const INCLUSION: f64 = 1e-9;
    pub const NORM_BOUND: f64 = 1e-9;
}

/// Runs the engine for `opts.iters` steps and checks every per-iteration
/// relation. Checks that need `phi*` or `d_0` are skipped when the problem
/// has no reference optimum.
pub fn verify_invariants(
    problem: &CompositeProblem,
    config: &SolverConfig,
    x0: ArrayView1<f64>,
    opts: &InvariantOptions,
) -> Result<VerificationReport> {
    let mut s = init(problem, config, x0)?;
    let kap = config.l_f - config.mu_f;
    let mu = config.mu();
    let l_f = config.l_f;
    let l_bar = problem.upper_curvature();
    let c = growth_factor(l_f, config.mu_f, mu);
    let reference = problem.reference();
    let phi_star = reference.map(|r| r.phi_star);
    let d0 = reference.map(|r| norm(&(&x0.to_owned() - &r.x_star)));
    let gap_slack = tol::GAP_SLACK * (1.0 + phi_star.map_or(0.0, f64::abs));
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(opts.seed);

    let mut coeff = Tracker::new("coefficient_identity", tol::COEFFICIENT_IDENTITY);
    let mut tau_id = Tracker::new("tau_identity", tol::TAU_IDENTITY);
    let mut a_growth = Tracker::new("a_lower_bound", tol::A_LOWER_BOUND);
    let mut a_monotone = Tracker::new("a_increasing", 0.0);
    let mut rate = Tracker::new("function_gap_rate", gap_slack);
    let mut dist_x = Tracker::new("distance_x", tol::DISTANCE);
    let mut dist_y = Tracker::new("distance_y", tol::DISTANCE);
    let mut movement = Tracker::new("summed_movement", tol::DISTANCE);
    let mut movement_d0 = Tracker::new("summed_movement_d0", tol::DISTANCE);
    let mut local = Tracker::new("stationarity_local_bound", tol::NORM_BOUND);
    let mut inclusion = Tracker::new("stationarity_inclusion", tol::INCLUSION);
    let mut min_norm = Tracker::new("min_norm_bound", tol::NORM_BOUND);
    let mut cert = Tracker::new("certificate_identity", tol::CERTIFICATE_IDENTITY);
    let mut eta_nonneg = Tracker::new("eta_nonnegative", tol::ETA_FLOOR);
    let mut v_bound = Tracker::new("v_norm_bound", tol::NORM_BOUND);
    let mut eta_bound = Tracker::new("eta_bound", tol::NORM_BOUND);
    let mut v_abs = Tracker::new("v_norm_bound_d0", tol::NORM_BOUND);
    let mut eta_abs = Tracker::new("eta_bound_d0", tol::NORM_BOUND);
    let mut curvature = Tracker::new("model_curvature", 0.0);
    let mut eps_sub = Tracker::new("eps_subgradient", tol::EPS_SUBGRADIENT);
    let mut model_ineq = Tracker::new("model_eps_subgradient", tol::EPS_SUBGRADIENT);
    let mut below = Tracker::new("model_below_phi", tol::EPS_SUBGRADIENT);
    let mut recursion = Tracker::new("model_recursion", tol::EPS_SUBGRADIENT);

    let mut moved = 0.0;
    let mut moved_floor = 0.0;
    let mut sum_a = 0.0;
    let mut min_u_sq = f64::INFINITY;

    for _ in 0..opts.iters {
        let (tau_k, a_k_prev) = (s.tau, s.big_a);
        let out = match s.step(problem) {
            Ok(out) => out,
            Err(Error::GrowthOverflow(_)) => break,
            Err(e) => return Err(e),
        };
        let k = s.k;
        let a_big = s.big_a;

        coeff.observe(rel(tau_k / out.a * (out.a_next / out.a) - kap, kap), k);
        tau_id.observe(rel(s.tau - (1.0 + mu * a_big), s.tau), k);
        let lb = a_lower_bound(k, l_f, config.mu_f, mu);
        a_growth.observe((lb - a_big) / lb, k);
        a_monotone.observe(if a_big > a_k_prev { 0.0 } else { 1.0 }, k);
        curvature.observe(if s.model.curvature == mu { 0.0 } else { 1.0 }, k);

        let step_sq = dist_sq(out.y_next.view(), out.x_tilde.view());
        moved += a_big * step_sq;
        // y_{k+1} - x̃_k cannot be resolved below the rounding level of the
        // forward step; once A_k is large that floor dominates the sum.
        let grad_tilde = s.grad_tilde_prev.as_ref().map_or(0.0, norm);
        let delta = ROUNDING_FACTOR * f64::EPSILON * (norm(&out.y_next) + norm(&out.x_tilde) + grad_tilde / l_f);
        moved_floor += a_big * delta * (delta + 2.0 * step_sq.sqrt());
        sum_a += a_big;

        let phi_y = problem.phi(s.y.view()).to_f64();
        let dy0 = dist_sq(s.y.view(), s.x0.view());

        let u = stationarity_residual(&s, problem)?;
        let grad_y = problem.f().gradient(s.y.view());
        let u_scale = 1.0 + norm(&grad_y) + l_f * norm(&s.y);
        local.observe((u.norm_u - 2.0 * l_f * step_sq.sqrt()) / u_scale, k);
        if let Some(gap) = problem.h().subdifferential_gap(s.y.view(), (&u.u - &grad_y).view()) {
            inclusion.observe(gap, k);
        }
        min_u_sq = min_u_sq.min(u.norm_u * u.norm_u);

        let pair = residual_pair(&s)?;
        // (1/tau)|A v + y - x0|^2 + 2 A eta = |y - x0|^2, scaled by sqrt(tau)
        // before squaring. Once tau_k is beyond 1/eps^2 the computed x_k - y_k
        // sits at its rounding floor and the two sides become large terms that
        // cancel, so the error is measured against the largest term.
        let w = (&pair.v * a_big + &s.y - &s.x0) / s.tau.sqrt();
        let t1 = norm_sq(&w);
        let t2 = 2.0 * a_big * pair.eta;
        let t3 = s.tau * dist_sq(s.x.view(), s.y.view());
        let scale = dy0.max(t1).max(t2.abs()).max(t3);
        cert.observe(rel(t1 + t2 - dy0, scale), k);
        eta_nonneg.observe(-pair.eta, k);
        let dyn0 = dy0.sqrt();
        v_bound.observe((pair.norm_v() - (1.0 + s.tau.sqrt()) * dyn0 / a_big) / (1.0 + dyn0), k);
        eta_bound.observe((pair.eta - dy0 / (2.0 * a_big)) / (1.0 + dy0), k);

        if let (Some(phi_star), Some(d0)) = (phi_star, d0) {
            let gap = phi_y - phi_star;
            let kf = k as f64;
            let factor = (4.0 / (kf * kf)).min((2.0 * (1.0 - kf) * c.ln()).exp());
            rate.observe(gap - 0.5 * kap * d0 * d0 * factor, k);
            let scale = 1.0 + d0;
            dist_x.observe((dist_sq(s.x.view(), s.x0.view()).sqrt() - (1.0 / s.tau.sqrt() + 1.0) * d0) / scale, k);
            if mu > 0.0 {
                dist_y.observe((dyn0 - 2.0 * (1.0 + 2.0 / (a_big * mu)) * d0) / scale, k);
                let q = 1.0 + 2.0 / (a_big * mu);
                let v_lim = 2.0 / a_big * (2.0 + (mu * a_big).sqrt()) * q * d0;
                v_abs.observe((pair.norm_v() - v_lim) / (1.0 + v_lim), k);
                let e_lim = 2.0 / a_big * q * q * d0 * d0;
                eta_abs.observe((pair.eta - e_lim) / (1.0 + e_lim), k);
            }
            // (L_f - L_bar)/2 sum A_{i+1}|y_{i+1} - x̃_i|^2 <= d0^2 - A_k gap <= d0^2,
            // with the gap allowed the same slack as in the rate check
            let d0_sq = d0 * d0;
            let lhs = 0.5 * (l_f - l_bar) * (moved - moved_floor).max(0.0);
            movement.observe((lhs + a_big * gap - d0_sq - a_big * gap_slack) / d0_sq.max(1.0), k);
            movement_d0.observe((lhs - d0_sq) / d0_sq.max(1.0), k);
            let bound = 8.0 * l_f * l_f * d0_sq / ((l_f - l_bar) * sum_a);
            min_norm.observe((min_u_sq.sqrt() - bound.sqrt()) / u_scale, k);
        }

        if opts.checkpoints.contains(&k) && opts.samples > 0 {
            let pts = sample_points(s.y.view(), problem, opts.samples, &mut rng);
            let r = check_eps_subgradient(&pair, &s, problem, &pts)?;
            let scale = 1.0 + phi_y.abs();
            if r.evaluated > 0 {
                eps_sub.observe(r.worst_violation / scale, k);
                below.observe(r.worst_model_excess / scale, k);
            }
            model_ineq.observe(r.worst_model_violation / scale, k);
            recursion.observe(r.worst_recursion_violation / scale, k);
        }
    }

    let checks = [
        coeff, tau_id, a_growth, a_monotone, curvature, rate, dist_x, dist_y, movement, movement_d0, local, inclusion, min_norm,
        cert, eta_nonneg, v_bound, eta_bound, v_abs, eta_abs, eps_sub, model_ineq, below, recursion,
    ]
    .into_iter()
    .filter_map(Tracker::finish)
    .collect();
    Ok(VerificationReport { checks })
}

/// Side-by-side run of the engine (`mu = 0`) and both classic forms.
pub fn verify_equivalence(
    problem: &CompositeProblem,
    x0: ArrayView1<f64>,
    l_f: f64,
    iters: u64,
    deviation_tol: f64,
) -> Result<VerificationReport> {
    let r = equivalence_check(problem, x0, l_f, iters)?;
    let at = Some(r.iterations);
    let mk = |name: &str, worst: f64, tol: f64| Check {
        name: name.into(),
        passed: worst <= tol,
        worst_violation: worst,
        tolerance: tol,
        location: at,
    };
    Ok(VerificationReport {
        checks: vec![
            mk("y_deviation_t_form", r.y_dev_t_form, deviation_tol),
            mk("y_deviation_alpha_form", r.y_dev_alpha_form, deviation_tol),
            mk("x_tilde_deviation", r.x_tilde_dev, deviation_tol),
            mk("t_recovery", r.t_recovery_err, 1e-10),
            mk("t_quadratic_residual", r.t_residual, 1e-12),
            mk("alpha_times_t", r.alpha_t_err, 1e-12),
            mk("y_convex_combination", r.y_combination_dev, 1e-10),
        ],
    })
}

/// Starting point used by the suites: `prox_h(0)`.
pub fn default_start(problem: &CompositeProblem) -> Point {
    problem.h().prox(Array1::zeros(problem.dim()).view(), 1.0 / problem.upper_curvature())
}

fn spec(kind: InstanceKind, seed: u64, m: usize, n: usize, edit: impl FnOnce(&mut InstanceParams)) -> InstanceSpec {
    let mut params = InstanceParams::defaults(kind);
    edit(&mut params);
    InstanceSpec::new(kind, seed, m, n).with_params(params)
}

/// Ten seeded instances with `mu > 0`.
pub fn strongly_convex_suite() -> Vec<InstanceSpec> {
    use InstanceKind::*;
    vec![
        spec(ElasticNet, 1, 80, 120, |_| {}),
        spec(ElasticNet, 2, 80, 120, |p| p.ridge = 0.1),
        spec(ElasticNet, 3, 120, 60, |p| p.ridge = 0.01),
        spec(ElasticNet, 4, 60, 100, |p| {
            p.ridge = 0.0;
            p.h_ridge = 0.5
        }),
        spec(LogisticL2, 5, 100, 50, |_| {}),
        spec(LogisticL2, 6, 80, 40, |p| p.ridge = 0.5),
        spec(BoxQp, 7, 1, 50, |p| p.diagonal = true),
        spec(BoxQp, 8, 1, 30, |p| p.diagonal = true),
        spec(BoxQp, 9, 60, 40, |p| p.ridge = 0.5),
        spec(BoxQp, 10, 40, 40, |p| p.ridge = 0.05),
    ]
}

/// Ten seeded instances with `mu = 0`.
pub fn plain_suite() -> Vec<InstanceSpec> {
    use InstanceKind::*;
    vec![
        spec(Lasso, 1, 60, 100, |_| {}),
        spec(Lasso, 2, 60, 100, |p| p.reg = 0.05),
        spec(Lasso, 3, 100, 200, |_| {}),
        spec(Lasso, 4, 40, 80, |p| p.reg = 0.2),
        spec(BoxQp, 5, 30, 40, |_| {}),
        spec(BoxQp, 6, 20, 50, |_| {}),
        spec(ElasticNet, 7, 60, 100, |p| p.ridge = 0.0),
        spec(LogisticL2, 8, 100, 40, |p| p.ridge = 0.0),
        spec(Lasso, 9, 50, 50, |_| {}),
        spec(Lasso, 10, 30, 90, |p| p.reg = 0.5),
    ]
}

/// Criteria checked against the predictors, with the tolerances used.
pub fn suite_criteria(strongly_convex: bool) -> Vec<Criterion> {
    let mut v = vec![
        Criterion::FunctionGap { eps_bar: 1e-8 },
        Criterion::Stationarity { rho: 1e-6 },
        Criterion::Relative { sigma_tilde: 1e-6 },
        Criterion::AlternateRelative { sigma: 1e-6 },
    ];
    if strongly_convex {
        v.push(Criterion::Absolute { eps: 1e-6, eta_tol: 1e-10 });
    }
    v
}

/// Observed first iteration for one criterion against its prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorOutcome {
    pub instance: String,
    pub criterion: Criterion,
    pub observed_k: Option<u64>,
    pub predicted_k: u64,
}

impl PredictorOutcome {
    pub fn holds(&self) -> bool {
        self.observed_k.is_some_and(|k| k <= self.predicted_k)
    }
}

fn label(spec: &InstanceSpec) -> String {
    format!("{}#{}", spec.kind, spec.seed)
}

/// Runs each criterion until it holds, giving up once the prediction is
/// exceeded.
pub fn predictor_outcomes(spec: &InstanceSpec, criteria: &[Criterion]) -> Result<Vec<PredictorOutcome>> {
    let problem = spec.build()?;
    let base = SolverConfig::for_problem(&problem);
    let x0 = default_start(&problem);
    let reference = problem.reference().ok_or_else(|| Error::InvalidConfig("suite instance without reference".into()))?;
    let inputs = BoundInputs {
        d0: norm(&(&x0 - &reference.x_star)),
        l_f: base.l_f,
        l_f_bar: problem.upper_curvature(),
        mu_f: base.mu_f,
        mu: base.mu(),
    };
    criteria
        .iter()
        .map(|c| {
            let report = predict(c, &inputs)?;
            let config = SolverConfig {
                criterion: Some(*c),
                max_iter: report.predicted_k,
                trace_every: u64::MAX,
                ..base.clone()
            };
            let r = run(&problem, &config, x0.view())?;
            Ok(PredictorOutcome {
                instance: label(spec),
                criterion: *c,
                observed_k: (r.stop == StopReason::Converged).then_some(r.state.k),
                predicted_k: report.predicted_k,
            })
        })
        .collect()
}

/// Runs until `A_k >= A_bar(mu, sigma_tilde)` and reports whether the
/// relative criterion holds there.
pub fn relative_threshold_holds(spec: &InstanceSpec, sigma_tilde: f64, max_iter: u64) -> Result<(u64, bool)> {
    let problem = spec.build()?;
    let config = SolverConfig::for_problem(&problem);
    let a_bar = abar_relative(config.mu(), sigma_tilde)?;
    let mut s = init(&problem, &config, default_start(&problem).view())?;
    while s.big_a < a_bar {
        if s.k >= max_iter {
            return Err(Error::NumericFailure(format!("A_k below {a_bar} after {max_iter} steps")));
        }
        s.step(&problem)?;
    }
    Ok((s.k, check(&Criterion::Relative { sigma_tilde }, &s, &problem)?))
}

/// Runs `job` on every item over `threads` workers; results keep input order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], threads: usize, job: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    let workers = threads.clamp(1, items.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let r = job(item);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|r| r.expect("worker finished every item")).collect()
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Predictor validity and the relative-threshold property on both seeded
/// suites.
pub fn verify_bounds(threads: usize) -> Result<VerificationReport> {
    let mut jobs: Vec<(InstanceSpec, bool)> = strongly_convex_suite().into_iter().map(|s| (s, true)).collect();
    jobs.extend(plain_suite().into_iter().map(|s| (s, false)));
    let results = parallel_map(&jobs, threads, |(spec, sc)| -> Result<(Vec<PredictorOutcome>, (u64, bool))> {
        let outcomes = predictor_outcomes(spec, &suite_criteria(*sc))?;
        let threshold = relative_threshold_holds(spec, 1e-6, 10_000_000)?;
        Ok((outcomes, threshold))
    });
    let mut report = VerificationReport::default();
    for ((spec, _), r) in jobs.iter().zip(results) {
        let (outcomes, threshold) = r?;
        for o in outcomes {
            report.checks.push(Check {
                name: format!("predictor/{}/{}", o.criterion, o.instance),
                passed: o.holds(),
                worst_violation: o.observed_k.map_or(f64::INFINITY, |k| k as f64 - o.predicted_k as f64),
                tolerance: 0.0,
                location: o.observed_k,
            });
        }
        let (k, ok) = threshold;
        report.checks.push(Check {
            name: format!("relative_threshold/{}", label(spec)),
            passed: ok,
            worst_violation: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            location: Some(k),
        });
    }
    Ok(report)
}
