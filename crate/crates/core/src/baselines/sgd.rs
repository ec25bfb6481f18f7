use ndarray::{Array1, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::BaselineRun;
use crate::error::{Error, Result};
use crate::linalg::all_finite;
use crate::model::{Dataset, RiskConfig};
use crate::risk::{check_args, WorkCounter};
use crate::trace::{EventKind, Recorder, TraceSink};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdConfig {
    pub stepsize: f64,
    pub batch: usize,
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig {
            stepsize: 2e-2,
            batch: 1,
            seed: 0,
        }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stepsize < 0.0 || !self.stepsize.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "SGD stepsize must be non-negative, got {}",
                self.stepsize
            )));
        }
        if self.batch == 0 {
            return Err(Error::InvalidArgument("SGD batch size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Constant-stepsize SGD on `R_n`, sampling with replacement. The ridge term
/// enters every step exactly. Emits an epoch event every `n` gradient units.
pub fn sgd(
    data: &Dataset,
    cfg: &RiskConfig,
    n: usize,
    w0: ArrayView1<f64>,
    sc: &SgdConfig,
    budget: u64,
    sink: &mut dyn TraceSink,
) -> Result<BaselineRun> {
    sc.validate()?;
    check_args(data, n, w0)?;
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    let mut rec = Recorder::new(sink, data.len());
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let mut work = WorkCounter::default();
    let mut w: Array1<f64> = w0.to_owned();
    let reg = cfg.reg(n);
    let scale = 1.0 / sc.batch as f64;
    let mut grad = Array1::<f64>::zeros(w.len());
    let mut next_epoch = n as u64;
    rec.emit(EventKind::Start, n, work, None, None, w.view());

    while work.grad_units < budget {
        grad.fill(0.0);
        for _ in 0..sc.batch {
            let k = rng.random_range(0..n);
            let x = data.row(k);
            let s = cfg.loss.derivative(x.dot(&w), data.label(k)) * scale;
            grad.scaled_add(s, &x);
        }
        grad.scaled_add(reg, &w);
        w.scaled_add(-sc.stepsize, &grad);
        work.grad_units += sc.batch as u64;
        if work.grad_units >= next_epoch {
            if !all_finite(w.view()) {
                return Err(Error::NonFinite("SGD iterate".into()));
            }
            rec.emit(EventKind::Epoch, n, work, None, None, w.view());
            while next_epoch <= work.grad_units {
                next_epoch += n as u64;
            }
        }
    }
    if !all_finite(w.view()) {
        return Err(Error::NonFinite("SGD iterate".into()));
    }
    rec.emit(EventKind::Finished, n, work, None, None, w.view());
    Ok(BaselineRun {
        w,
        work,
        events: rec.events,
    })
}
