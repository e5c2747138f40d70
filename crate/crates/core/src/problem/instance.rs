//! Seeded benchmark instances and their `key = value` file format.
//!
//! All randomness comes from `Xoshiro256PlusPlus::seed_from_u64(seed)` with
//! Gaussian draws from `rand_distr::StandardNormal`, consumed in a fixed
//! order, so an instance is reproducible from `(kind, seed, m, n, params)`.
//!
//! | kind          | f                                        | h                               |
//! |---------------|------------------------------------------|---------------------------------|
//! | `lasso`       | `1/2 |Ax-b|^2`                           | `reg |x|_1`                     |
//! | `elastic_net` | `1/2 |Ax-b|^2 + ridge/2 |x|^2`           | `reg |x|_1 + h_ridge/2 |x|^2`   |
//! | `box_qp`      | `1/2 x^T Q x + <c,x>`                    | indicator of `[box_lo, box_hi]^n` |
//! | `logistic_l2` | mean logistic loss `+ ridge/2 |x|^2`     | `reg |x|_1`                     |

use std::fmt::{self, Write as _};
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use super::prox::{BoxIndicator, ElasticNetPenalty, L1Norm};
use super::reference::reference_solve;
use super::smooth::{LeastSquares, Logistic, Quadratic};
use super::{CompositeProblem, ReferenceOptimum};
use crate::error::{Error, Result};

/// Name of the generator recorded in instance files and trace headers.
pub const PRNG_NAME: &str = "xoshiro256++";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstanceKind {
    Lasso,
    ElasticNet,
    BoxQp,
    LogisticL2,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 4] =
        [InstanceKind::Lasso, InstanceKind::ElasticNet, InstanceKind::BoxQp, InstanceKind::LogisticL2];

    pub fn as_str(self) -> &'static str {
        match self {
            InstanceKind::Lasso => "lasso",
            InstanceKind::ElasticNet => "elastic_net",
            InstanceKind::BoxQp => "box_qp",
            InstanceKind::LogisticL2 => "logistic_l2",
        }
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InstanceKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown problem kind `{s}`")))
    }
}

/// Per-kind parameters. Fields a kind does not use must stay at their
/// defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceParams {
    /// `l1` weight in `h`.
    pub reg: f64,
    /// Ridge weight folded into `f` (sets `mu_bar_f`).
    pub ridge: f64,
    /// Quadratic weight folded into `h` (sets `mu_bar_h`), elastic net only.
    pub h_ridge: f64,
    pub box_lo: f64,
    pub box_hi: f64,
    /// `box_qp` only: use `Q = diag(1, ..., n)`.
    pub diagonal: bool,
}

impl InstanceParams {
    pub fn defaults(kind: InstanceKind) -> Self {
        let base = InstanceParams { reg: 0.0, ridge: 0.0, h_ridge: 0.0, box_lo: -1.0, box_hi: 1.0, diagonal: false };
        match kind {
            InstanceKind::Lasso => InstanceParams { reg: 0.1, ..base },
            InstanceKind::ElasticNet => InstanceParams { reg: 0.1, ridge: 1.0, ..base },
            InstanceKind::BoxQp => base,
            InstanceKind::LogisticL2 => InstanceParams { reg: 0.01, ridge: 0.1, ..base },
        }
    }

    fn validate(&self, kind: InstanceKind) -> Result<()> {
        let nonneg = [("reg", self.reg), ("ridge", self.ridge), ("h_ridge", self.h_ridge)];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be finite and >= 0 (got {v})")));
            }
        }
        if !(self.box_lo.is_finite() && self.box_hi.is_finite() && self.box_lo <= self.box_hi) {
            return Err(Error::InvalidArgument(format!(
                "box bounds must be finite with lo <= hi (got [{}, {}])",
                self.box_lo, self.box_hi
            )));
        }
        let d = InstanceParams::defaults(kind);
        let unused = |name: &str, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("parameter `{name}` does not apply to {kind}")))
            }
        };
        match kind {
            InstanceKind::Lasso => {
                unused("ridge", self.ridge == 0.0)?;
                unused("h_ridge", self.h_ridge == 0.0)?;
            }
            InstanceKind::ElasticNet => {}
            InstanceKind::BoxQp => {
                unused("reg", self.reg == 0.0)?;
                unused("h_ridge", self.h_ridge == 0.0)?;
                unused("ridge", !self.diagonal || self.ridge == 0.0)?;
            }
            InstanceKind::LogisticL2 => unused("h_ridge", self.h_ridge == 0.0)?,
        }
        if kind != InstanceKind::BoxQp {
            unused("diagonal", !self.diagonal)?;
            unused("box_lo", self.box_lo == d.box_lo)?;
            unused("box_hi", self.box_hi == d.box_hi)?;
        }
        Ok(())
    }
}

/// Everything needed to regenerate an instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub params: InstanceParams,
}

/// Parsed instance file: the spec plus whatever constants were recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub spec: InstanceSpec,
    pub lf_bar: Option<f64>,
    pub mu_f_bar: Option<f64>,
    pub phi_star: Option<f64>,
}

/// Formats a real with 17 significant digits (lossless for `f64`).
pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v > 0.0 {
        "inf".into()
    } else if v < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

impl InstanceSpec {
    pub fn new(kind: InstanceKind, seed: u64, m: usize, n: usize) -> Self {
        InstanceSpec { kind, seed, m, n, params: InstanceParams::defaults(kind) }
    }

    pub fn with_params(mut self, params: InstanceParams) -> Self {
        self.params = params;
        self
    }

    pub fn build(&self) -> Result<CompositeProblem> {
        make_instance(self.kind, self.seed, (self.m, self.n), self.params)
    }

    /// Serializes the spec and the problem's computed constants.
    pub fn to_text(&self, problem: &CompositeProblem) -> String {
        let p = &self.params;
        let mut s = String::new();
        let _ = writeln!(s, "# composite problem instance");
        let _ = writeln!(s, "kind = {}", self.kind);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "prng = {PRNG_NAME}");
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "reg = {}", format_real(p.reg));
        let _ = writeln!(s, "ridge = {}", format_real(p.ridge));
        let _ = writeln!(s, "h_ridge = {}", format_real(p.h_ridge));
        let _ = writeln!(s, "box_lo = {}", format_real(p.box_lo));
        let _ = writeln!(s, "box_hi = {}", format_real(p.box_hi));
        let _ = writeln!(s, "diagonal = {}", p.diagonal);
        let _ = writeln!(s, "lf_bar = {}", format_real(problem.upper_curvature()));
        let _ = writeln!(s, "mu_f_bar = {}", format_real(problem.mu_bar_f()));
        let _ = writeln!(s, "mu_h_bar = {}", format_real(problem.mu_bar_h()));
        if let Some(r) = problem.reference() {
            let _ = writeln!(s, "phi_star = {}", format_real(r.phi_star));
        }
        s
    }

    pub fn parse(text: &str) -> Result<InstanceFile> {
        let mut kv = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
            kv.push((k.trim().to_string(), v.trim().to_string()));
        }
        let get = |key: &str| kv.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let need = |key: &str| get(key).ok_or_else(|| Error::Parse(format!("missing key `{key}`")));
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Parse(format!("bad value for `{key}`: {v}")))
        }

        let kind: InstanceKind = need("kind")?.parse().map_err(|e: Error| Error::Parse(e.to_string()))?;
        if let Some(prng) = get("prng") {
            if prng != PRNG_NAME {
                return Err(Error::Parse(format!("unsupported prng `{prng}`")));
            }
        }
        let mut params = InstanceParams::defaults(kind);
        for (key, slot) in [
            ("reg", &mut params.reg),
            ("ridge", &mut params.ridge),
            ("h_ridge", &mut params.h_ridge),
            ("box_lo", &mut params.box_lo),
            ("box_hi", &mut params.box_hi),
        ] {
            if let Some(v) = get(key) {
                *slot = num(key, v)?;
            }
        }
        if let Some(v) = get("diagonal") {
            params.diagonal = num("diagonal", v)?;
        }
        let spec = InstanceSpec {
            kind,
            seed: num("seed", need("seed")?)?,
            m: num("m", need("m")?)?,
            n: num("n", need("n")?)?,
            params,
        };
        let opt = |key: &str| get(key).map(|v| num::<f64>(key, v)).transpose();
        Ok(InstanceFile { spec, lf_bar: opt("lf_bar")?, mu_f_bar: opt("mu_f_bar")?, phi_star: opt("phi_star")? })
    }
}

fn gaussian_matrix(rng: &mut Xoshiro256PlusPlus, m: usize, n: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((m, n), || scale * rng.sample::<f64, _>(StandardNormal))
}

fn gaussian_vector(rng: &mut Xoshiro256PlusPlus, n: usize) -> Array1<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Sparse ground truth with `max(1, n/10)` Gaussian nonzeros.
fn sparse_truth(rng: &mut Xoshiro256PlusPlus, n: usize) -> Array1<f64> {
    let support = index::sample(rng, n, (n / 10).max(1));
    let mut x = Array1::zeros(n);
    for i in support.iter() {
        x[i] = rng.sample::<f64, _>(StandardNormal);
    }
    x
}

/// Generates a seeded instance, computes its curvature constants and
/// attaches a reference optimum from [`reference_solve`].
pub fn make_instance(
    kind: InstanceKind,
    seed: u64,
    (m, n): (usize, usize),
    params: InstanceParams,
) -> Result<CompositeProblem> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("shape must be positive (got {m}x{n})")));
    }
    params.validate(kind)?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);

    let problem = match kind {
        InstanceKind::Lasso | InstanceKind::ElasticNet => {
            let a = gaussian_matrix(&mut rng, m, n, 1.0 / (m as f64).sqrt());
            let truth = sparse_truth(&mut rng, n);
            let noise = gaussian_vector(&mut rng, m);
            let b = a.dot(&truth) + noise * 0.01;
            let f = LeastSquares::new(a, b, params.ridge)?;
            if kind == InstanceKind::Lasso {
                CompositeProblem::new(Box::new(f), Box::new(L1Norm::new(params.reg)), n)?
            } else {
                let h = ElasticNetPenalty::new(params.reg, params.h_ridge);
                CompositeProblem::new(Box::new(f), Box::new(h), n)?
            }
        }
        InstanceKind::BoxQp => {
            let f = if params.diagonal {
                let d: Array1<f64> = (1..=n).map(|i| i as f64).collect();
                let c = gaussian_vector(&mut rng, n) * &d * 1.5;
                Quadratic::diagonal(d, c)?
            } else {
                let b = gaussian_matrix(&mut rng, m, n, 1.0 / (m as f64).sqrt());
                let mut q = b.t().dot(&b);
                q.diag_mut().mapv_inplace(|v| v + params.ridge);
                let c = gaussian_vector(&mut rng, n);
                Quadratic::new(q, c, params.ridge)?
            };
            let h = BoxIndicator::new(Array1::from_elem(n, params.box_lo), Array1::from_elem(n, params.box_hi))?;
            CompositeProblem::new(Box::new(f), Box::new(h), n)?
        }
        InstanceKind::LogisticL2 => {
            let a = gaussian_matrix(&mut rng, m, n, 1.0);
            let truth = sparse_truth(&mut rng, n);
            let noise = gaussian_vector(&mut rng, m);
            let labels = (a.dot(&truth) + noise * 0.5).mapv(|z| if z >= 0.0 { 1.0 } else { -1.0 });
            let f = Logistic::new(a, labels, params.ridge)?;
            CompositeProblem::new(Box::new(f), Box::new(L1Norm::new(params.reg)), n)?
        }
    };

    let start = problem.h().prox(Array1::zeros(n).view(), 1.0 / problem.upper_curvature());
    let sol = reference_solve(&problem, start.view())?;
    problem.with_reference(ReferenceOptimum { phi_star: sol.phi_star, x_star: sol.x_star })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in InstanceKind::ALL {
            assert_eq!(k.as_str().parse::<InstanceKind>().unwrap(), k);
        }
        assert!("ridge".parse::<InstanceKind>().is_err());
    }

    #[test]
    fn elastic_net_mu_bar_is_the_ridge() {
        let params = InstanceParams { ridge: 0.75, ..InstanceParams::defaults(InstanceKind::ElasticNet) };
        let p = make_instance(InstanceKind::ElasticNet, 5, (20, 30), params).unwrap();
        assert_eq!(p.mu_bar_f(), 0.75);
    }

    #[test]
    fn diagonal_box_qp_curvature() {
        let n = 200;
        let params = InstanceParams { diagonal: true, ..InstanceParams::defaults(InstanceKind::BoxQp) };
        let p = make_instance(InstanceKind::BoxQp, 1, (1, n), params).unwrap();
        let expected = n as f64 * (1.0 + 1e-9);
        assert!((p.upper_curvature() - expected).abs() <= 1e-9 * expected);
        assert!(p.upper_curvature() >= n as f64);
        assert_eq!(p.mu_bar_f(), 1.0);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = InstanceSpec::new(InstanceKind::Lasso, 42, 100, 200);
        let a = spec.build().unwrap();
        let b = spec.build().unwrap();
        assert_eq!(spec.to_text(&a), spec.to_text(&b));
        let (ra, rb) = (a.reference().unwrap(), b.reference().unwrap());
        assert_eq!(ra.x_star, rb.x_star);
        let other = InstanceSpec::new(InstanceKind::Lasso, 43, 100, 200).build().unwrap();
        assert_ne!(a.upper_curvature(), other.upper_curvature());
    }

    #[test]
    fn invalid_params_are_rejected() {
        let bad = InstanceParams { ridge: 1.0, ..InstanceParams::defaults(InstanceKind::Lasso) };
        assert!(make_instance(InstanceKind::Lasso, 1, (5, 5), bad).is_err());
        let bad = InstanceParams { reg: -1.0, ..InstanceParams::defaults(InstanceKind::Lasso) };
        assert!(make_instance(InstanceKind::Lasso, 1, (5, 5), bad).is_err());
        let bad = InstanceParams { box_lo: 2.0, ..InstanceParams::defaults(InstanceKind::BoxQp) };
        assert!(make_instance(InstanceKind::BoxQp, 1, (5, 5), bad).is_err());
        assert!(make_instance(InstanceKind::Lasso, 1, (0, 5), InstanceParams::defaults(InstanceKind::Lasso)).is_err());
    }

    #[test]
    fn instance_file_round_trip() {
        let spec = InstanceSpec::new(InstanceKind::LogisticL2, 9, 30, 12);
        let p = spec.build().unwrap();
        let text = spec.to_text(&p);
        let parsed = InstanceSpec::parse(&text).unwrap();
        assert_eq!(parsed.spec, spec);
        assert_eq!(parsed.lf_bar, Some(p.upper_curvature()));
        assert_eq!(parsed.mu_f_bar, Some(p.mu_bar_f()));
        assert_eq!(parsed.phi_star, Some(p.reference().unwrap().phi_star));
    }

    #[test]
    fn malformed_instance_files() {
        assert!(matches!(InstanceSpec::parse("kind = lasso\nseed = 1\nm = 3"), Err(Error::Parse(_))));
        assert!(InstanceSpec::parse("kind lasso").is_err());
        assert!(InstanceSpec::parse("kind = lasso\nseed = x\nm = 3\nn = 3").is_err());
        assert!(InstanceSpec::parse("kind = lasso\nseed = 1\nm = 3\nn = 3\nprng = pcg").is_err());
    }

    #[test]
    fn format_real_has_17_significant_digits() {
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        assert_eq!(format_real(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(format_real(f64::INFINITY), "inf");
    }
}
