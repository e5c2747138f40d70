use std::process::{Command, Output};

use sfista::trace::read_trace;

fn sfista(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfista")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
}

#[test]
fn solve_writes_a_trace_and_converges() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("out.csv");
    let o = sfista(&[
        "solve", "--problem", "lasso", "--seed", "42", "--m", "100", "--n", "200", "--reg", "0.1",
        "--criterion", "stationarity", "--rho", "1e-6", "--trace", trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(value(&out, "stop"), Some("converged"));
    let k: u64 = value(&out, "k").unwrap().parse().unwrap();
    let norm_u: f64 = value(&out, "norm_u").unwrap().parse().unwrap();
    assert!(norm_u <= 1e-6);

    let t = read_trace(std::fs::File::open(&trace).unwrap()).unwrap();
    assert_eq!(t.records.len() as u64, k);
    assert_eq!(t.records.last().unwrap().norm_u, Some(norm_u));
    assert!(t.meta.contains(&("seed".into(), "42".into())));
    assert!(t.meta.contains(&("prng".into(), "xoshiro256++".into())));
}

#[test]
fn traces_match_across_runs_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("t{i}.csv"))).collect();
    for p in &paths {
        let o = sfista(&["solve", "--problem", "elastic_net", "--m", "40", "--n", "60", "--max-iter", "50",
            "--trace-every", "5", "--trace", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1));
    }
    let read = |p: &std::path::Path| {
        let mut t = read_trace(std::fs::File::open(p).unwrap()).unwrap();
        t.records.iter_mut().for_each(|r| r.elapsed_ns = 0);
        t
    };
    let (a, b) = (read(&paths[0]), read(&paths[1]));
    assert_eq!(a, b);
    assert_eq!(a.records.iter().map(|r| r.k).collect::<Vec<_>>(), (1..=10).map(|i| 5 * i).collect::<Vec<_>>());
}

#[test]
fn zero_iterations_exit_one() {
    let o = sfista(&["solve", "--m", "20", "--n", "30", "--max-iter", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(value(&stdout(&o), "stop"), Some("max_iter"));
}

#[test]
fn invalid_inputs_exit_two() {
    let o = sfista(&["solve", "--m", "20", "--n", "30", "--lf", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("must exceed"));

    assert_eq!(sfista(&["solve", "--bogus"]).status.code(), Some(2));
    assert_eq!(sfista(&["solve", "--m", "20", "--n", "30", "--criterion", "stationarity"]).status.code(), Some(2));
    assert_eq!(sfista(&["solve", "--m", "20", "--n", "30", "--criterion", "nope", "--rho", "1"]).status.code(), Some(2));
    assert_eq!(sfista(&["solve", "--problem", "lasso", "--ridge", "1"]).status.code(), Some(2));
    let o = sfista(&["predict", "--criterion", "absolute", "--eps", "1", "--eta-tol", "1", "--d0", "1", "--lf", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn predict_examples() {
    let o = sfista(&["predict", "--criterion", "stationarity", "--rho", "1", "--d0", "1", "--lf", "2", "--lf-bar", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(value(&out, "predicted_k"), Some("10"));
    assert_eq!(value(&out, "zeta"), Some("6.4000000000000000e1"));
    assert_eq!(value(&out, "logarithmic"), Some("disabled"));

    let out = stdout(&sfista(&["predict", "--criterion", "relative", "--sigma-tilde", "1", "--lf", "2", "--mu-h", "1"]));
    assert_eq!(value(&out, "a_bar"), Some("4.0000000000000000e0"));

    let out = stdout(&sfista(&["predict", "--criterion", "function_gap", "--eps-bar", "1e-3", "--d0", "0", "--lf", "2"]));
    assert_eq!(value(&out, "predicted_k"), Some("1"));
}

#[test]
fn predict_from_an_instance() {
    let o = sfista(&["predict", "--from-instance", "--problem", "elastic_net", "--m", "40", "--n", "60",
        "--criterion", "absolute", "--eps", "1e-6", "--eta-tol", "1e-10"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(value(&stdout(&o), "big_m").is_some());
}

#[test]
fn verify_suites_pass() {
    let o = sfista(&["verify", "equivalence", "--iters", "100", "--tol", "1e-9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = sfista(&["verify", "invariants", "--problem", "box_qp", "--seed", "7", "--iters", "2000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(value(&stdout(&o), "overall"), Some("pass"));
    let o = sfista(&["verify", "bounds", "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn impossible_tolerance_fails_verification() {
    let o = sfista(&["verify", "equivalence", "--iters", "100", "--tol", "0"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(3), "{out}");
    assert_eq!(value(&out, "overall"), Some("fail"));
    assert!(value(&out, "y_deviation_t_form").unwrap().starts_with("FAIL"));
}

#[test]
fn make_instance_round_trips_through_solve() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.txt");
    let o = sfista(&["make-instance", "--problem", "box_qp", "--diagonal", "--m", "1", "--n", "12", "--seed", "3",
        "--out", inst.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&inst).unwrap();
    assert!(text.contains("lf_bar = 1.2000000"));
    let o = sfista(&["solve", "--instance", inst.to_str().unwrap(), "--criterion", "absolute", "--eps", "1e-8",
        "--eta-tol", "1e-12"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn explicit_start_point() {
    let dir = tempfile::tempdir().unwrap();
    let x0 = dir.path().join("x0.txt");
    std::fs::write(&x0, "0.5 -0.5 0.25\n").unwrap();
    let args = ["solve", "--problem", "box_qp", "--m", "5", "--n", "3", "--criterion", "stationarity", "--rho", "1e-8",
        "--x0", x0.to_str().unwrap()];
    assert_eq!(sfista(&args).status.code(), Some(0));
    std::fs::write(&x0, "5 0 0\n").unwrap();
    let o = sfista(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("domain"));
}

#[test]
fn help_exits_zero() {
    let o = sfista(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("make-instance"));
}
