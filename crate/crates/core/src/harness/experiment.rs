use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::{Array1, ArrayView1};

use super::config::{Clock, ExperimentConfig, SolverKind};
use super::summary::{interpolate_target, TARGET_MULTIPLES};
use super::{fmt_f64, write_trace, TraceRow};
use crate::adanewton::{ada_newton_with_sink, StepRecord};
use crate::baselines::{newton_linesearch, saga, sgd, ReferenceCache};
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::model::{Dataset, RiskConfig};
use crate::risk::{risk_gradient, risk_value, WorkCounter};
use crate::theory::audit_step;
use crate::trace::{EventKind, TraceEvent, TraceSink};

/// Result of one solver within an experiment.
#[derive(Debug, Clone)]
pub struct SolverOutcome {
    pub solver: SolverKind,
    pub rows: Vec<TraceRow>,
    /// Set when the solver aborted; rows recorded before the abort are kept.
    pub error: Option<String>,
    pub work: WorkCounter,
    pub hessian_inversions: Option<u64>,
    /// Ada Newton only: whether it finished certified at `n = N`.
    pub certified: Option<bool>,
    steps: Vec<StepRecord>,
}

impl SolverOutcome {
    pub fn final_subopt(&self) -> Option<f64> {
        self.rows.last().map(|r| r.subopt)
    }

    /// Passes at which `subopt <= k/N` was first reached.
    pub fn passes_to(&self, target: f64) -> Option<f64> {
        interpolate_target(&self.rows, target).map(|h| h.0)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub n_total: usize,
    pub reference_value: f64,
    pub reference_grad_norm: f64,
    pub outcomes: Vec<SolverOutcome>,
    pub out_dir: PathBuf,
}

impl ExperimentReport {
    /// 0 when every solver finished, 1 if any aborted.
    pub fn exit_code(&self) -> i32 {
        if self.outcomes.iter().any(|o| o.error.is_some()) { 1 } else { 0 }
    }

    pub fn outcome(&self, solver: SolverKind) -> Option<&SolverOutcome> {
        self.outcomes.iter().find(|o| o.solver == solver)
    }
}

/// Turns solver events into trace rows measured against `R_N*`.
struct RowSink<'a> {
    data: &'a Dataset,
    risk: &'a RiskConfig,
    reference: f64,
    solver: &'static str,
    clock: Clock,
    rows: Vec<TraceRow>,
}

impl TraceSink for RowSink<'_> {
    fn record(&mut self, ev: &TraceEvent, w: ArrayView1<f64>) {
        if ev.kind == EventKind::StepBacktracked {
            return;
        }
        let total = self.data.len();
        let passes = ev.passes;
        let hessian = ev.work.hessian_passes(total);
        if let Some(last) = self.rows.last() {
            if last.passes == passes && last.hessian_units_over_n == hessian && last.n == ev.n {
                return;
            }
        }
        let grad_norm = ev.grad_norm.unwrap_or_else(|| {
            risk_gradient(self.data, self.risk, ev.n, w, &mut WorkCounter::default())
                .map(|g| norm(g.view()))
                .unwrap_or(f64::NAN)
        });
        let subopt = risk_value(self.data, self.risk, total, w)
            .map(|v| v - self.reference)
            .unwrap_or(f64::NAN);
        self.rows.push(TraceRow {
            solver: self.solver.to_string(),
            passes,
            hessian_units_over_n: hessian,
            elapsed_s: match self.clock {
                Clock::Wall => ev.elapsed,
                Clock::None => 0.0,
            },
            grad_norm,
            subopt,
            n: ev.n,
        });
    }
}

fn run_solver(
    kind: SolverKind,
    cfg: &ExperimentConfig,
    data: &Dataset,
    risk: &RiskConfig,
    reference: f64,
    budget: u64,
) -> SolverOutcome {
    let total = data.len();
    let w0 = Array1::<f64>::zeros(data.dim());
    let mut sink = RowSink {
        data,
        risk,
        reference,
        solver: kind.name(),
        clock: cfg.clock,
        rows: Vec::new(),
    };
    let mut outcome = SolverOutcome {
        solver: kind,
        rows: Vec::new(),
        error: None,
        work: WorkCounter::default(),
        hessian_inversions: None,
        certified: None,
        steps: Vec::new(),
    };
    let result = match kind {
        SolverKind::AdaNewton => ada_newton_with_sink(data, risk, &cfg.ada(Some(budget)), &mut sink).map(|run| {
            outcome.work = run.state.work;
            outcome.hessian_inversions = Some(run.state.hessian_inversions);
            outcome.certified = Some(run.certified);
            outcome.steps = run.steps;
        }),
        SolverKind::Newton => newton_linesearch(
            data,
            risk,
            total,
            w0.view(),
            &cfg.line_search(),
            cfg.newton_tol,
            Some(budget),
            &mut sink,
        )
        .map(|run| {
            outcome.work = run.work;
            outcome.hessian_inversions = Some(run.events.iter().filter(|e| e.kind == EventKind::StepAccepted).count() as u64);
        }),
        SolverKind::Sgd => sgd(data, risk, total, w0.view(), &cfg.sgd(cfg.seed.wrapping_add(1)), budget, &mut sink)
            .map(|run| outcome.work = run.work),
        SolverKind::Saga if budget < total as u64 => {
            // The budget does not cover the table; report the initial point.
            let ev = TraceEvent {
                kind: EventKind::Start,
                n: total,
                work: WorkCounter::default(),
                passes: 0.0,
                grad_norm: None,
                decrement: None,
                elapsed: 0.0,
            };
            sink.record(&ev, w0.view());
            Ok(())
        }
        SolverKind::Saga => saga(data, risk, total, w0.view(), &cfg.saga(cfg.seed.wrapping_add(2)), budget, &mut sink)
            .map(|run| outcome.work = run.work),
    };
    if let Err(e) = result {
        outcome.error = Some(e.to_string());
    }
    outcome.rows = sink.rows;
    outcome
}

/// Loads the data, computes the shared reference optimum (cached under
/// `out_dir/cache`), runs every configured solver and writes
/// `trace_<solver>.csv`, `summary.csv` and, when enabled, `audit.csv`.
///
/// Errors are returned for configuration, data and reference failures; solver
/// aborts are recorded in the report instead.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let data = cfg.dataset()?;
    let risk = cfg.risk()?;
    let total = data.len();
    let out = cfg.out_dir.clone();
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let mut cache = ReferenceCache::with_dir(out.join("cache"));
    let reference = cache.get(&data, &risk, total)?;
    let budget = (cfg.budget_passes * total as f64).ceil().max(1.0) as u64;

    let kinds = cfg.solver_kinds();
    let outcomes: Vec<SolverOutcome> = if cfg.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = kinds
                .iter()
                .map(|&k| {
                    let (data, risk) = (&data, &risk);
                    s.spawn(move || run_solver(k, cfg, data, risk, reference.value, budget))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
        })
    } else {
        kinds
            .iter()
            .map(|&k| run_solver(k, cfg, &data, &risk, reference.value, budget))
            .collect()
    };

    for o in &outcomes {
        write_trace(&out.join(format!("trace_{}.csv", o.solver.name())), &o.rows)?;
    }
    write_summary(&out.join("summary.csv"), &outcomes, total)?;
    if cfg.audit {
        if let Some(ada) = outcomes.iter().find(|o| o.solver == SolverKind::AdaNewton) {
            write_audit(&out.join("audit.csv"), &data, &risk, &ada.steps, &mut cache)?;
        }
    }

    Ok(ExperimentReport {
        n_total: total,
        reference_value: reference.value,
        reference_grad_norm: reference.grad_norm,
        outcomes,
        out_dir: out,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_else(|| "inf".into())
}

fn write_summary(path: &Path, outcomes: &[SolverOutcome], total: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Config(format!("summary: {e}"));
    w.write_record([
        "solver",
        "status",
        "target_multiple",
        "passes_to_target",
        "time_to_target",
        "final_passes",
        "final_subopt",
        "message",
    ])
    .map_err(csv_err)?;
    for o in outcomes {
        let status = if o.error.is_some() { "aborted" } else { "ok" };
        let last = o.rows.last();
        for &k in &TARGET_MULTIPLES {
            let hit = interpolate_target(&o.rows, k as f64 / total as f64);
            w.write_record([
                o.solver.name().to_string(),
                status.to_string(),
                k.to_string(),
                opt(hit.map(|h| h.0)),
                opt(hit.map(|h| h.1)),
                opt(last.map(|r| r.passes)),
                opt(last.map(|r| r.subopt)),
                o.error.clone().unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("summary: {e}")))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_audit(
    path: &Path,
    data: &Dataset,
    risk: &RiskConfig,
    steps: &[StepRecord],
    cache: &mut ReferenceCache,
) -> Result<()> {
    let mut out = Vec::new();
    writeln!(
        out,
        "m,n,accepted,fallback,lambda_before,lambda_after,sub_before,sub_after,bound_144,bound_transfer,contraction_ok,bound_144_ok"
    )
    .expect("write to vec");
    for s in steps {
        let reference = cache.get(data, risk, s.n)?;
        let a = audit_step(data, risk, s.m, s.n, s.w_m.view(), s.w_n.view(), Some(reference.value))?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            s.m,
            s.n,
            s.accepted,
            s.fallback,
            fmt_f64(a.lambda_before),
            fmt_f64(a.lambda_after),
            opt(a.sub_before),
            opt(a.sub_after),
            opt(a.bound_144),
            fmt_f64(a.bound_transfer),
            a.contraction_ok,
            a.bound_144_ok.unwrap_or(false)
        )
        .expect("write to vec");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
