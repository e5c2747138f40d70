use proptest::prelude::*;

use sfista::bounds::{a_lower_bound, Criterion};
use sfista::certificates::{residual_pair, stationarity_residual, LowerModel};
use sfista::engine::{init, run, SolverConfig, StopReason};
use sfista::problem::instance::{InstanceKind, InstanceSpec};
use sfista::problem::CompositeProblem;
use sfista::verify::default_start;

fn kind_strategy() -> impl Strategy<Value = InstanceKind> {
    prop_oneof![
        Just(InstanceKind::Lasso),
        Just(InstanceKind::ElasticNet),
        Just(InstanceKind::BoxQp),
        Just(InstanceKind::LogisticL2),
    ]
}

fn build(kind: InstanceKind, seed: u64, m: usize, n: usize) -> CompositeProblem {
    InstanceSpec::new(kind, seed, m, n).build().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn iteration_identities_hold(
        kind in kind_strategy(), seed in 0u64..1000, m in 5usize..30, n in 5usize..30, lf_factor in 1.01f64..3.0,
    ) {
        let p = build(kind, seed, m, n);
        let config = SolverConfig { l_f: lf_factor * p.upper_curvature(), ..SolverConfig::for_problem(&p) };
        let kap = config.l_f - config.mu_f;
        let mut s = init(&p, &config, default_start(&p).view()).unwrap();
        for _ in 0..300 {
            let tau = s.tau;
            let out = match s.step(&p) {
                Ok(o) => o,
                Err(sfista::Error::GrowthOverflow(_)) => break,
                Err(e) => panic!("{e}"),
            };
            prop_assert!(((tau / out.a) * (out.a_next / out.a) - kap).abs() <= 1e-10 * kap);
            prop_assert!((s.tau - (1.0 + config.mu() * s.big_a)).abs() <= 1e-12 * s.tau);
            let lb = a_lower_bound(s.k, config.l_f, config.mu_f, config.mu());
            prop_assert!(s.big_a >= lb * (1.0 - 1e-10));
            prop_assert!(p.h().value(s.y.view()).is_finite());
            prop_assert_eq!(s.model.curvature, config.mu());
            let pair = residual_pair(&s).unwrap();
            prop_assert!(pair.eta >= -1e-12);
        }
    }
}

#[test]
fn stationarity_run_meets_its_tolerance() {
    let p = build(InstanceKind::Lasso, 42, 100, 200);
    let config = SolverConfig {
        criterion: Some(Criterion::Stationarity { rho: 1e-6 }),
        ..SolverConfig::for_problem(&p)
    };
    let r = run(&p, &config, default_start(&p).view()).unwrap();
    assert_eq!(r.stop, StopReason::Converged);
    assert!(stationarity_residual(&r.state, &p).unwrap().norm_u <= 1e-6);
    assert_eq!(r.trace.last().unwrap().k, r.state.k);
}

fn iterations_to_gap(p: &CompositeProblem, config: &SolverConfig, eps: f64) -> u64 {
    let c = SolverConfig { criterion: Some(Criterion::FunctionGap { eps_bar: eps }), max_iter: 1_000_000, trace_every: u64::MAX, ..config.clone() };
    let r = run(p, &c, default_start(p).view()).unwrap();
    assert_eq!(r.stop, StopReason::Converged);
    r.state.k
}

// Least-squares slope of k against log(1/eps).
fn slope(ks: &[u64], eps: &[f64]) -> f64 {
    let xs: Vec<f64> = eps.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

#[test]
fn strong_convexity_gives_logarithmic_growth() {
    let p = build(InstanceKind::ElasticNet, 42, 100, 200);
    let eps: Vec<f64> = (1..=5).map(|i| 10f64.powi(-2 * i)).collect();
    let strong = SolverConfig::for_problem(&p);
    assert_eq!(strong.mu(), 1.0);
    let plain = SolverConfig { mu_f: 0.0, mu_h: 0.0, ..strong.clone() };
    let ks_strong: Vec<u64> = eps.iter().map(|&e| iterations_to_gap(&p, &strong, e)).collect();
    let ks_plain: Vec<u64> = eps.iter().map(|&e| iterations_to_gap(&p, &plain, e)).collect();
    // geometric convergence: a constant number of extra steps per decade
    let s_strong = slope(&ks_strong, &eps);
    let s_plain = slope(&ks_plain, &eps);
    assert!(s_strong < s_plain, "{ks_strong:?} vs {ks_plain:?}");
    let steps: Vec<i64> = ks_strong.windows(2).map(|w| w[1] as i64 - w[0] as i64).collect();
    assert!(steps.iter().all(|&d| d <= 2 * steps[0].max(4)), "{ks_strong:?}");
}

#[test]
fn aggregated_model_matches_direct_sum() {
    let p = build(InstanceKind::ElasticNet, 3, 20, 30);
    let config = SolverConfig { keep_model_history: true, ..SolverConfig::for_problem(&p) };
    let mut s = init(&p, &config, default_start(&p).view()).unwrap();
    let query = default_start(&p) + 0.3;
    for _ in 0..20 {
        s.step(&p).unwrap();
        let history = s.model_history.as_ref().unwrap();
        let total: f64 = history.iter().map(|g| g.weight).sum();
        let direct: f64 = history.iter().map(|g| g.weight * g.eval(query.view())).sum::<f64>() / total;
        let agg = s.model.eval(query.view());
        assert!((agg - direct).abs() <= 1e-10 * (1.0 + direct.abs()), "k = {}: {agg} vs {direct}", s.k);
        assert!((s.model.weight - s.big_a).abs() <= 1e-12 * s.big_a);
    }
}

#[test]
fn first_model_is_the_first_piece() {
    let p = build(InstanceKind::Lasso, 5, 20, 30);
    let config = SolverConfig { keep_model_history: true, ..SolverConfig::for_problem(&p) };
    let mut s = init(&p, &config, default_start(&p).view()).unwrap();
    s.step(&p).unwrap();
    let piece: &LowerModel = &s.model_history.as_ref().unwrap()[0];
    assert_eq!(s.model.constant, piece.constant);
    assert_eq!(s.model.linear, piece.linear);
}

#[test]
fn model_curvature_does_not_drift() {
    let p = build(InstanceKind::LogisticL2, 6, 40, 20);
    let config = SolverConfig::for_problem(&p);
    let mu = config.mu();
    let mut s = init(&p, &config, default_start(&p).view()).unwrap();
    for _ in 0..1000 {
        if s.step(&p).is_err() {
            break;
        }
        assert_eq!(s.model.curvature, mu);
    }
}

#[test]
fn traces_are_reproducible() {
    let p = build(InstanceKind::Lasso, 42, 50, 80);
    let config = SolverConfig { max_iter: 200, trace_every: 7, ..SolverConfig::for_problem(&p) };
    let strip = |mut v: Vec<sfista::trace::TraceRecord>| {
        v.iter_mut().for_each(|r| r.elapsed_ns = 0);
        v
    };
    let a = strip(run(&p, &config, default_start(&p).view()).unwrap().trace);
    let q = build(InstanceKind::Lasso, 42, 50, 80);
    let b = strip(run(&q, &config, default_start(&q).view()).unwrap().trace);
    assert_eq!(a, b);
    assert!(a.windows(2).all(|w| w[0].k < w[1].k && w[0].big_a < w[1].big_a));
}
