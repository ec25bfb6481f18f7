//! Experiment configuration, solver suites, CSV traces and summaries.

mod check;
mod config;
mod experiment;
mod summary;

pub use check::{run_checks, CheckResult};
pub use config::{Clock, DataSourceKind, ExperimentConfig, SolverKind, OUT_DIR_ENV};
pub use experiment::{run_experiment, ExperimentReport, SolverOutcome};
pub use summary::{interpolate_target, read_trace, summarize, Summary, TargetHit, TARGET_MULTIPLES};

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Header of every trace CSV.
pub const TRACE_HEADER: &str = "solver,passes,hessian_units_over_N,elapsed_s,grad_norm,subopt,n";

/// One line of a trace CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub solver: String,
    pub passes: f64,
    pub hessian_units_over_n: f64,
    pub elapsed_s: f64,
    /// `||grad R_n(w)||` at the row's sample size.
    pub grad_norm: f64,
    /// `R_N(w) - R_N*`.
    pub subopt: f64,
    pub n: usize,
}

/// Formats a float so that it parses back to the same bits; infinities are
/// written as `inf`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "{TRACE_HEADER}").expect("write to vec");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.solver,
            fmt_f64(r.passes),
            fmt_f64(r.hessian_units_over_n),
            fmt_f64(r.elapsed_s),
            fmt_f64(r.grad_norm),
            fmt_f64(r.subopt),
            r.n
        )
        .expect("write to vec");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
