//! Per-iteration trace records and their CSV form.
//!
//! Reals are written with 17 significant digits so they round-trip exactly;
//! optional cells are empty. Metadata such as the PRNG and seed goes in
//! `# key = value` lines before the header.

use std::io::{Read, Write};
use std::time::Duration;

use crate::certificates::{residual_pair, stationarity_residual};
use crate::engine::IterateState;
use crate::error::{Error, Result};
use crate::problem::instance::format_real;
use crate::problem::CompositeProblem;

pub const COLUMNS: [&str; 10] =
    ["k", "a", "A", "tau", "phi_y", "gap", "norm_u", "norm_v", "eta_residual", "elapsed_ns"];

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: u64,
    /// `a_{k-1}`, the step that produced this iterate.
    pub a: f64,
    pub big_a: f64,
    pub tau: f64,
    pub phi_y: f64,
    pub gap: Option<f64>,
    pub norm_u: Option<f64>,
    pub norm_v: Option<f64>,
    pub eta_residual: Option<f64>,
    pub elapsed_ns: u64,
}

impl TraceRecord {
    /// Snapshot of an iterate with `k >= 1`.
    pub fn capture(state: &IterateState, problem: &CompositeProblem, elapsed: Duration) -> Result<Self> {
        let a = state.a_prev.ok_or(Error::UndefinedCertificate)?;
        let phi_y = problem.phi(state.y.view()).to_f64();
        let pair = residual_pair(state)?;
        Ok(TraceRecord {
            k: state.k,
            a,
            big_a: state.big_a,
            tau: state.tau,
            phi_y,
            gap: problem.reference().map(|r| phi_y - r.phi_star),
            norm_u: Some(stationarity_residual(state, problem)?.norm_u),
            norm_v: Some(pair.norm_v()),
            eta_residual: Some(pair.eta),
            elapsed_ns: u64::try_from(elapsed.as_nanos()).unwrap_or(u64::MAX),
        })
    }

    fn to_row(&self) -> [String; 10] {
        let opt = |v: Option<f64>| v.map(format_real).unwrap_or_default();
        [
            self.k.to_string(),
            format_real(self.a),
            format_real(self.big_a),
            format_real(self.tau),
            format_real(self.phi_y),
            opt(self.gap),
            opt(self.norm_u),
            opt(self.norm_v),
            opt(self.eta_residual),
            self.elapsed_ns.to_string(),
        ]
    }

    fn from_row(row: &csv::StringRecord, line: u64) -> Result<Self> {
        if row.len() != COLUMNS.len() {
            return Err(Error::Parse(format!("line {line}: expected {} fields, got {}", COLUMNS.len(), row.len())));
        }
        let bad = |col: usize| Error::Parse(format!("line {line}: bad value for `{}`: {:?}", COLUMNS[col], &row[col]));
        let real = |col: usize| row[col].parse::<f64>().map_err(|_| bad(col));
        let opt = |col: usize| if row[col].is_empty() { Ok(None) } else { real(col).map(Some) };
        Ok(TraceRecord {
            k: row[0].parse().map_err(|_| bad(0))?,
            a: real(1)?,
            big_a: real(2)?,
            tau: real(3)?,
            phi_y: real(4)?,
            gap: opt(5)?,
            norm_u: opt(6)?,
            norm_v: opt(7)?,
            eta_residual: opt(8)?,
            elapsed_ns: row[9].parse().map_err(|_| bad(9))?,
        })
    }
}

/// Writes `# key = value` comment lines, the header and one row per record.
pub fn write_trace<W: Write>(mut out: W, meta: &[(&str, String)], records: &[TraceRecord]) -> Result<()> {
    for (k, v) in meta {
        writeln!(out, "# {k} = {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in records {
        w.write_record(r.to_row())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub meta: Vec<(String, String)>,
    pub records: Vec<TraceRecord>,
}

pub fn read_trace<R: Read>(mut input: R) -> Result<TraceFile> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let meta = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .filter_map(|l| l[1..].split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect();
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = rd.headers()?.clone();
    if header.iter().ne(COLUMNS) {
        return Err(Error::Parse(format!("unexpected trace header: {header:?}")));
    }
    let mut records = Vec::new();
    for row in rd.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        records.push(TraceRecord::from_row(&row, line)?);
    }
    Ok(TraceFile { meta, records })
}
