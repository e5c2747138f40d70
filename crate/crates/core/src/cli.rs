//! Command-line front end. Exit codes: 0 converged or all checks passed,
//! 1 iteration limit (or `A_k` overflow), 2 invalid input, 3 failed checks.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array1;

use crate::bounds::{predict, BoundInputs, Criterion, CriterionKind};
use crate::engine::{run, SolverConfig, StopReason, DEFAULT_LF_FACTOR};
use crate::error::{Error, Result};
use crate::problem::instance::{format_real, InstanceKind, InstanceParams, InstanceSpec, PRNG_NAME};
use crate::problem::{norm, CompositeProblem, Point};
use crate::trace::write_trace;
use crate::verify::{default_start, default_threads, verify_bounds, verify_equivalence, verify_invariants, InvariantOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MAX_ITER: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

/// A number or `auto`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AutoOr {
    Auto,
    Value(f64),
}

impl FromStr for AutoOr {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(AutoOr::Auto);
        }
        s.parse().map(AutoOr::Value).map_err(|_| format!("expected a number or `auto`, got {s:?}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "sfista", version, about = "Accelerated proximal gradient with certificates and iteration bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the solver on a generated instance and write a CSV trace.
    Solve(SolveArgs),
    /// Evaluate an iteration-count bound.
    Predict(PredictArgs),
    /// Check the solver's guarantees numerically.
    Verify(VerifyArgs),
    /// Generate an instance and write its description.
    MakeInstance(MakeInstanceArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ProblemArg {
    Lasso,
    ElasticNet,
    BoxQp,
    LogisticL2,
}

impl From<ProblemArg> for InstanceKind {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::Lasso => InstanceKind::Lasso,
            ProblemArg::ElasticNet => InstanceKind::ElasticNet,
            ProblemArg::BoxQp => InstanceKind::BoxQp,
            ProblemArg::LogisticL2 => InstanceKind::LogisticL2,
        }
    }
}

#[derive(Debug, Args)]
struct InstanceArgs {
    #[arg(long, value_enum, default_value = "lasso")]
    problem: ProblemArg,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// l1 weight.
    #[arg(long)]
    reg: Option<f64>,
    /// Ridge weight in the smooth part.
    #[arg(long)]
    ridge: Option<f64>,
    /// Quadratic weight in the nonsmooth part (elastic net).
    #[arg(long)]
    h_ridge: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    box_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    box_hi: Option<f64>,
    /// box_qp: use the diagonal Hessian diag(1..n).
    #[arg(long)]
    diagonal: bool,
    /// Read the instance description from a file written by make-instance.
    #[arg(long, conflicts_with_all = ["problem", "seed", "m", "n", "reg", "ridge", "h_ridge", "box_lo", "box_hi", "diagonal"])]
    instance: Option<PathBuf>,
}

impl InstanceArgs {
    fn spec(&self) -> Result<InstanceSpec> {
        if let Some(path) = &self.instance {
            return Ok(InstanceSpec::parse(&fs::read_to_string(path)?)?.spec);
        }
        let kind = InstanceKind::from(self.problem);
        let mut params = InstanceParams::defaults(kind);
        for (slot, v) in [
            (&mut params.reg, self.reg),
            (&mut params.ridge, self.ridge),
            (&mut params.h_ridge, self.h_ridge),
            (&mut params.box_lo, self.box_lo),
            (&mut params.box_hi, self.box_hi),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
        params.diagonal = self.diagonal;
        Ok(InstanceSpec::new(kind, self.seed, self.m, self.n).with_params(params))
    }
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// `auto` is 1.25 times the upper curvature constant.
    #[arg(long, default_value = "auto")]
    lf: AutoOr,
    #[arg(long, default_value = "auto")]
    mu_f: AutoOr,
    #[arg(long, default_value = "auto")]
    mu_h: AutoOr,
}

impl SolverArgs {
    fn config(&self, problem: &CompositeProblem) -> SolverConfig {
        let pick = |a: AutoOr, auto: f64| match a {
            AutoOr::Auto => auto,
            AutoOr::Value(v) => v,
        };
        SolverConfig {
            l_f: pick(self.lf, DEFAULT_LF_FACTOR * problem.upper_curvature()),
            mu_f: pick(self.mu_f, problem.mu_bar_f()),
            mu_h: pick(self.mu_h, problem.mu_bar_h()),
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct CriterionArgs {
    /// function_gap | stationarity | relative | alternate_relative | absolute
    #[arg(long)]
    criterion: Option<String>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    sigma_tilde: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eta_tol: Option<f64>,
    #[arg(long)]
    eps_bar: Option<f64>,
}

impl CriterionArgs {
    fn criterion(&self) -> Result<Option<Criterion>> {
        let Some(name) = &self.criterion else { return Ok(None) };
        let need = |flag: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::InvalidConfig(format!("criterion {name} needs --{flag}")))
        };
        let c = match name.parse::<CriterionKind>()? {
            CriterionKind::FunctionGap => Criterion::FunctionGap { eps_bar: need("eps-bar", self.eps_bar)? },
            CriterionKind::Stationarity => Criterion::Stationarity { rho: need("rho", self.rho)? },
            CriterionKind::Relative => Criterion::Relative { sigma_tilde: need("sigma-tilde", self.sigma_tilde)? },
            CriterionKind::AlternateRelative => Criterion::AlternateRelative { sigma: need("sigma", self.sigma)? },
            CriterionKind::Absolute => Criterion::Absolute {
                eps: need("eps", self.eps)?,
                eta_tol: need("eta-tol", self.eta_tol)?,
            },
        };
        c.validate()?;
        Ok(Some(c))
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    criterion: CriterionArgs,
    #[arg(long, default_value_t = 10_000)]
    max_iter: u64,
    /// CSV trace output.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    trace_every: u64,
    /// Starting point as whitespace-separated numbers; defaults to prox_h(0).
    #[arg(long)]
    x0: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[command(flatten)]
    criterion: CriterionArgs,
    /// Take constants from a generated instance instead of the flags below.
    #[arg(long)]
    from_instance: bool,
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value = "auto")]
    lf: AutoOr,
    #[arg(long, default_value = "auto")]
    mu_f: AutoOr,
    #[arg(long, default_value = "auto")]
    mu_h: AutoOr,
    /// Upper curvature constant of f.
    #[arg(long)]
    lf_bar: Option<f64>,
    /// Distance from the start to the solution set.
    #[arg(long)]
    d0: Option<f64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(subcommand)]
    suite: VerifySuite,
}

#[derive(Debug, Subcommand)]
enum VerifySuite {
    /// Per-iteration identities and inequalities on one instance.
    Invariants {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 2000)]
        iters: u64,
        /// Sample points per checkpoint for the lower-model checks.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// The engine with mu = 0 against the classic t- and alpha-forms.
    Equivalence {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value = "auto")]
        lf: AutoOr,
        #[arg(long, default_value_t = 100)]
        iters: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Observed iteration counts against the predicted ones on seeded suites.
    Bounds {
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct MakeInstanceArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a, out),
        Command::Predict(a) => predict_cmd(a, out),
        Command::Verify(a) => verify_cmd(a, out),
        Command::MakeInstance(a) => make_instance_cmd(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn kv(out: &mut dyn Write, key: &str, value: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "{key} = {value}")?;
    Ok(())
}

fn read_point(path: &PathBuf, dim: usize) -> Result<Point> {
    let text = fs::read_to_string(path)?;
    let v = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {t:?} in {}", path.display()))))
        .collect::<Result<Vec<_>>>()?;
    crate::error::check_dim(dim, v.len())?;
    Ok(Array1::from(v))
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = a.instance.spec()?;
    let criterion = a.criterion.criterion()?;
    let problem = spec.build()?;
    let config = SolverConfig {
        max_iter: a.max_iter,
        trace_every: a.trace_every,
        criterion,
        ..a.solver.config(&problem)
    };
    let x0 = match &a.x0 {
        Some(p) => read_point(p, problem.dim())?,
        None => default_start(&problem),
    };
    let r = run(&problem, &config, x0.view())?;

    if let Some(path) = &a.trace {
        let meta = [
            ("prng", PRNG_NAME.to_string()),
            ("seed", spec.seed.to_string()),
            ("kind", spec.kind.to_string()),
            ("m", spec.m.to_string()),
            ("n", spec.n.to_string()),
            ("lf", format_real(config.l_f)),
            ("mu_f", format_real(config.mu_f)),
            ("mu_h", format_real(config.mu_h)),
        ];
        write_trace(fs::File::create(path)?, &meta, &r.trace)?;
    }

    kv(out, "stop", r.stop)?;
    kv(out, "k", r.state.k)?;
    if let Some(c) = &config.criterion {
        kv(out, "criterion", c)?;
    }
    if let Some(last) = r.trace.last() {
        kv(out, "A", format_real(last.big_a))?;
        kv(out, "phi_y", format_real(last.phi_y))?;
        if let Some(g) = last.gap {
            kv(out, "gap", format_real(g))?;
        }
        for (key, v) in [("norm_u", last.norm_u), ("norm_v", last.norm_v), ("eta_residual", last.eta_residual)] {
            if let Some(v) = v {
                kv(out, key, format_real(v))?;
            }
        }
    }
    if let Some(path) = &a.trace {
        kv(out, "trace", path.display())?;
    }
    Ok(match r.stop {
        StopReason::Converged => EXIT_OK,
        StopReason::MaxIter | StopReason::GrowthOverflow => EXIT_MAX_ITER,
    })
}

fn predict_cmd(a: PredictArgs, out: &mut dyn Write) -> Result<i32> {
    let criterion = a
        .criterion
        .criterion()?
        .ok_or_else(|| Error::InvalidConfig("predict needs --criterion".into()))?;
    let need = |flag: &str, v: Option<f64>| v.ok_or_else(|| Error::InvalidConfig(format!("predict needs --{flag}")));
    let explicit = |flag: &str, v: AutoOr| match v {
        AutoOr::Value(x) => Ok(x),
        AutoOr::Auto => Err(Error::InvalidConfig(format!("--{flag} auto needs --from-instance"))),
    };
    let inputs = if a.from_instance {
        let problem = a.instance.spec()?.build()?;
        let config = SolverArgs { lf: a.lf, mu_f: a.mu_f, mu_h: a.mu_h }.config(&problem);
        config.validate(&problem)?;
        let x_star = &problem.reference().ok_or_else(|| Error::InvalidConfig("instance has no reference".into()))?.x_star;
        BoundInputs {
            d0: a.d0.unwrap_or_else(|| norm(&(&default_start(&problem) - x_star))),
            l_f: config.l_f,
            l_f_bar: problem.upper_curvature(),
            mu_f: config.mu_f,
            mu: config.mu(),
        }
    } else {
        let l_f = explicit("lf", a.lf)?;
        let mu_f = match a.mu_f {
            AutoOr::Auto => 0.0,
            AutoOr::Value(v) => v,
        };
        let mu_h = match a.mu_h {
            AutoOr::Auto => 0.0,
            AutoOr::Value(v) => v,
        };
        let uses_d0 = !matches!(criterion, Criterion::Relative { .. } | Criterion::AlternateRelative { .. });
        let uses_lf_bar = matches!(criterion, Criterion::Stationarity { .. });
        BoundInputs {
            d0: if uses_d0 { need("d0", a.d0)? } else { a.d0.unwrap_or(0.0) },
            l_f,
            l_f_bar: if uses_lf_bar { need("lf-bar", a.lf_bar)? } else { a.lf_bar.unwrap_or(0.0) },
            mu_f,
            mu: mu_f + mu_h,
        }
    };
    let report = predict(&criterion, &inputs)?;
    out.write_all(report.to_text().as_bytes())?;
    Ok(EXIT_OK)
}

fn verify_cmd(a: VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let report = match a.suite {
        VerifySuite::Invariants { instance, solver, iters, samples } => {
            let problem = instance.spec()?.build()?;
            let config = solver.config(&problem);
            let opts = InvariantOptions { iters, samples, ..InvariantOptions::default() };
            verify_invariants(&problem, &config, default_start(&problem).view(), &opts)?
        }
        VerifySuite::Equivalence { instance, lf, iters, tol } => {
            let problem = instance.spec()?.build()?;
            let l_f = match lf {
                AutoOr::Auto => DEFAULT_LF_FACTOR * problem.upper_curvature(),
                AutoOr::Value(v) => v,
            };
            verify_equivalence(&problem, default_start(&problem).view(), l_f, iters, tol)?
        }
        VerifySuite::Bounds { threads } => verify_bounds(threads.unwrap_or_else(default_threads))?,
    };
    out.write_all(report.to_text().as_bytes())?;
    Ok(if report.overall() { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn make_instance_cmd(a: MakeInstanceArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = a.instance.spec()?;
    let problem = spec.build()?;
    let text = spec.to_text(&problem);
    match &a.out {
        Some(path) => fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}
