use std::fs;
use std::path::Path;

use super::{TraceRow, TRACE_HEADER};
use crate::error::{Error, Result};

/// Targets are these multiples of `1/N`.
pub const TARGET_MULTIPLES: [u32; 3] = [1, 10, 100];

/// Passes and seconds at which a solver first reached `subopt <= target`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetHit {
    pub solver: String,
    pub multiple: u32,
    pub target: f64,
    pub passes: Option<f64>,
    pub time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    /// Largest sample size seen in any trace.
    pub n_total: usize,
    pub hits: Vec<TargetHit>,
    /// Files that could not be read, with the reason.
    pub errors: Vec<(String, String)>,
}

impl Summary {
    pub fn hit(&self, solver: &str, multiple: u32) -> Option<&TargetHit> {
        self.hits.iter().find(|h| h.solver == solver && h.multiple == multiple)
    }
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 1;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        if i == 0 {
            let header: Vec<&str> = rec.iter().collect();
            if header.join(",") != TRACE_HEADER {
                return Err(parse_err(line, format!("expected header '{TRACE_HEADER}'")));
            }
            continue;
        }
        if rec.len() != 7 {
            return Err(parse_err(line, format!("expected 7 fields, found {}", rec.len())));
        }
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("field {} is not a number: '{}'", k + 1, &rec[k])))
        };
        rows.push(TraceRow {
            solver: rec[0].to_string(),
            passes: num(1)?,
            hessian_units_over_n: num(2)?,
            elapsed_s: num(3)?,
            grad_norm: num(4)?,
            subopt: num(5)?,
            n: rec[6]
                .parse()
                .map_err(|_| parse_err(line, format!("field 7 is not an integer: '{}'", &rec[6])))?,
        });
    }
    if rows.is_empty() {
        return Err(parse_err(1, "trace has no rows".into()));
    }
    Ok(rows)
}

/// First crossing of `subopt <= target`, interpolated linearly in `subopt`
/// between the bracketing rows. Returns `(passes, seconds)`.
pub fn interpolate_target(rows: &[TraceRow], target: f64) -> Option<(f64, f64)> {
    let i = rows.iter().position(|r| r.subopt <= target)?;
    if i == 0 {
        return Some((rows[0].passes, rows[0].elapsed_s));
    }
    let (a, b) = (&rows[i - 1], &rows[i]);
    let t = (a.subopt - target) / (a.subopt - b.subopt);
    Some((
        a.passes + t * (b.passes - a.passes),
        a.elapsed_s + t * (b.elapsed_s - a.elapsed_s),
    ))
}

/// Reads every `trace_*.csv` in `dir` and tabulates passes and time to reach
/// `k/N` for each `k` in [`TARGET_MULTIPLES`].
pub fn summarize(dir: impl AsRef<Path>) -> Result<Summary> {
    let dir = dir.as_ref();
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("trace_") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Config(format!("no trace_*.csv files in {}", dir.display())));
    }

    let mut summary = Summary::default();
    let mut traces = Vec::new();
    for f in files {
        match read_trace(&f) {
            Ok(rows) => traces.push(rows),
            Err(e) => summary.errors.push((f.display().to_string(), e.to_string())),
        }
    }
    summary.n_total = traces.iter().flatten().map(|r| r.n).max().unwrap_or(0);
    let total = summary.n_total.max(1) as f64;
    for rows in &traces {
        for &k in &TARGET_MULTIPLES {
            let target = k as f64 / total;
            let hit = interpolate_target(rows, target);
            summary.hits.push(TargetHit {
                solver: rows[0].solver.clone(),
                multiple: k,
                target,
                passes: hit.map(|h| h.0),
                time_s: hit.map(|h| h.1),
            });
        }
    }
    Ok(summary)
}
