use ndarray::{Array1, ArrayView1};

use super::BaselineRun;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Cholesky};
use crate::model::{Dataset, RiskConfig};
use crate::risk::{check_args, risk_gradient, risk_hessian, risk_value, WorkCounter};
use crate::trace::{EventKind, Recorder, TraceSink};

/// Armijo backtracking parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchConfig {
    /// Sufficient decrease fraction in (0, 0.5).
    pub armijo_alpha: f64,
    pub shrink_beta: f64,
    pub max_halvings: usize,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        LineSearchConfig {
            armijo_alpha: 0.4,
            shrink_beta: 0.5,
            max_halvings: 60,
        }
    }
}

impl LineSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.armijo_alpha > 0.0 && self.armijo_alpha < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "armijo_alpha must lie in (0, 0.5), got {}",
                self.armijo_alpha
            )));
        }
        if !(self.shrink_beta > 0.0 && self.shrink_beta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "shrink_beta must lie in (0, 1), got {}",
                self.shrink_beta
            )));
        }
        Ok(())
    }
}

const MAX_PURE_STEPS: usize = 3;

/// Damped Newton on `R_n` with Armijo backtracking, until
/// `||grad R_n(w)|| <= tol` or `budget` gradient units are spent.
///
/// Every objective evaluation costs `n` gradient units. Once the predicted
/// decrease drops below what `f64` can resolve at the current objective value,
/// up to three unit steps are taken without a line search.
#[allow(clippy::too_many_arguments)]
pub fn newton_linesearch(
    data: &Dataset,
    cfg: &RiskConfig,
    n: usize,
    w0: ArrayView1<f64>,
    ls: &LineSearchConfig,
    tol: f64,
    budget: Option<u64>,
    sink: &mut dyn TraceSink,
) -> Result<BaselineRun> {
    ls.validate()?;
    check_args(data, n, w0)?;
    let mut rec = Recorder::new(sink, data.len());
    let mut work = WorkCounter::default();
    let mut w: Array1<f64> = w0.to_owned();
    rec.emit(EventKind::Start, n, work, None, None, w.view());

    let mut f = risk_value(data, cfg, n, w.view())?;
    work.grad_units += n as u64;
    let mut last_norm;
    let mut pure_steps = 0;
    loop {
        let g = risk_gradient(data, cfg, n, w.view(), &mut work)?;
        last_norm = norm(g.view());
        if last_norm <= tol || budget.is_some_and(|b| work.grad_units >= b) {
            break;
        }
        let h = risk_hessian(data, cfg, n, w.view(), &mut work)?;
        let d = Cholesky::factor(&h)?.solve(g.view());
        let slope = dot(g.view(), d.view());
        if slope <= 1e3 * f64::EPSILON * (1.0 + f.abs()) {
            // Decrease below objective resolution: deep in the quadratic
            // region, so take the unit step unchecked.
            pure_steps += 1;
            if pure_steps > MAX_PURE_STEPS {
                break;
            }
            w = &w - &d;
            f = risk_value(data, cfg, n, w.view())?;
            work.grad_units += n as u64;
            rec.emit(EventKind::StepAccepted, n, work, None, Some(slope.max(0.0).sqrt()), w.view());
            continue;
        }
        let mut t = 1.0;
        let mut halvings = 0;
        let (next, f_next) = loop {
            let trial = &w - &(t * &d);
            let f_t = risk_value(data, cfg, n, trial.view())?;
            work.grad_units += n as u64;
            if f_t <= f - ls.armijo_alpha * t * slope {
                break (trial, f_t);
            }
            halvings += 1;
            if halvings > ls.max_halvings {
                return Err(Error::LineSearchFailed { halvings });
            }
            t *= ls.shrink_beta;
        };
        w = next;
        f = f_next;
        rec.emit(EventKind::StepAccepted, n, work, None, Some(slope.sqrt()), w.view());
    }
    rec.emit(EventKind::Finished, n, work, Some(last_norm), None, w.view());
    Ok(BaselineRun {
        w,
        work,
        events: rec.events,
    })
}
