use ndarray::{Array1, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::BaselineRun;
use crate::error::{Error, Result};
use crate::linalg::all_finite;
use crate::model::{Dataset, RiskConfig};
use crate::risk::{check_args, WorkCounter};
use crate::theory::estimate_lipschitz;
use crate::trace::{EventKind, Recorder, TraceSink};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SagaConfig {
    pub stepsize: f64,
    pub seed: u64,
    /// Replace `stepsize` by `1/(3L)` with `L` the smoothness of `R_n`.
    pub auto_scale: bool,
}

impl Default for SagaConfig {
    fn default() -> Self {
        SagaConfig {
            stepsize: 0.2,
            seed: 0,
            auto_scale: false,
        }
    }
}

impl SagaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stepsize <= 0.0 || !self.stepsize.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "SAGA stepsize must be positive, got {}",
                self.stepsize
            )));
        }
        Ok(())
    }
}

/// SAGA state over the first `n` samples.
///
/// The per-sample gradient of a linear model is a multiple of its feature
/// row, so the table keeps one scalar per sample.
pub struct Saga<'a> {
    data: &'a Dataset,
    cfg: RiskConfig,
    n: usize,
    stepsize: f64,
    reg: f64,
    w: Array1<f64>,
    table: Vec<f64>,
    avg: Array1<f64>,
    rng: ChaCha8Rng,
}

impl<'a> Saga<'a> {
    /// Fills the table at `w0`, which costs `n` gradient units.
    pub fn new(data: &'a Dataset, cfg: &RiskConfig, n: usize, w0: ArrayView1<f64>, sc: &SagaConfig) -> Result<Self> {
        sc.validate()?;
        check_args(data, n, w0)?;
        let reg = cfg.reg(n);
        let stepsize = if sc.auto_scale {
            1.0 / (3.0 * (estimate_lipschitz(data, cfg.loss) + reg))
        } else {
            sc.stepsize
        };
        let mut table = Vec::with_capacity(n);
        let mut avg = Array1::<f64>::zeros(w0.len());
        for k in 0..n {
            let x = data.row(k);
            let s = cfg.loss.derivative(x.dot(&w0), data.label(k));
            avg.scaled_add(s, &x);
            table.push(s);
        }
        avg /= n as f64;
        Ok(Saga {
            data,
            cfg: *cfg,
            n,
            stepsize,
            reg,
            w: w0.to_owned(),
            table,
            avg,
            rng: ChaCha8Rng::seed_from_u64(sc.seed),
        })
    }

    pub fn w(&self) -> ArrayView1<'_, f64> {
        self.w.view()
    }

    pub fn stepsize(&self) -> f64 {
        self.stepsize
    }

    /// Incrementally maintained table average.
    pub fn table_average(&self) -> ArrayView1<'_, f64> {
        self.avg.view()
    }

    /// Table average recomputed from scratch.
    pub fn naive_table_average(&self) -> Array1<f64> {
        let mut acc = Array1::<f64>::zeros(self.w.len());
        for (k, &s) in self.table.iter().enumerate() {
            acc.scaled_add(s, &self.data.row(k));
        }
        acc / self.n as f64
    }

    /// Search direction the update would use if sample `j` were drawn.
    pub fn direction(&self, j: usize) -> Array1<f64> {
        let x = self.data.row(j);
        let s = self.cfg.loss.derivative(x.dot(&self.w), self.data.label(j));
        let mut d = self.avg.clone();
        d.scaled_add(s - self.table[j], &x);
        d.scaled_add(self.reg, &self.w);
        d
    }

    /// One update with a uniformly drawn sample; one gradient unit.
    pub fn step(&mut self) {
        let j = self.rng.random_range(0..self.n);
        let x = self.data.row(j);
        let s = self.cfg.loss.derivative(x.dot(&self.w), self.data.label(j));
        let delta = s - self.table[j];
        let mut d = self.avg.clone();
        d.scaled_add(delta, &x);
        d.scaled_add(self.reg, &self.w);
        self.w.scaled_add(-self.stepsize, &d);
        self.avg.scaled_add(delta / self.n as f64, &x);
        self.table[j] = s;
    }
}

/// SAGA on `R_n` from `w0` until `budget` gradient units are spent. The
/// table initialization counts toward the budget.
pub fn saga(
    data: &Dataset,
    cfg: &RiskConfig,
    n: usize,
    w0: ArrayView1<f64>,
    sc: &SagaConfig,
    budget: u64,
    sink: &mut dyn TraceSink,
) -> Result<BaselineRun> {
    if budget < n as u64 {
        return Err(Error::InvalidArgument(format!(
            "SAGA budget {budget} cannot cover the table initialization ({n})"
        )));
    }
    let mut rec = Recorder::new(sink, data.len());
    rec.emit(EventKind::Start, n, WorkCounter::default(), None, None, w0);
    let mut state = Saga::new(data, cfg, n, w0, sc)?;
    let mut work = WorkCounter {
        grad_units: n as u64,
        hessian_units: 0,
    };
    let mut next_epoch = 2 * n as u64;
    rec.emit(EventKind::Epoch, n, work, None, None, state.w());
    while work.grad_units < budget {
        state.step();
        work.grad_units += 1;
        if work.grad_units >= next_epoch {
            if !all_finite(state.w()) {
                return Err(Error::NonFinite("SAGA iterate".into()));
            }
            rec.emit(EventKind::Epoch, n, work, None, None, state.w());
            next_epoch += n as u64;
        }
    }
    if !all_finite(state.w()) {
        return Err(Error::NonFinite("SAGA iterate".into()));
    }
    rec.emit(EventKind::Finished, n, work, None, None, state.w());
    Ok(BaselineRun {
        w: state.w,
        work,
        events: rec.events,
    })
}
