//! Adaptive sample size Newton method.
//!
//! Starting from a gradient-descent warmup on the first `m0` samples, each
//! outer iteration grows the sample size from `m` to `n = ceil(alpha m)`,
//! takes one unit Newton step on `R_n` from the current iterate and accepts
//! it once `||grad R_n(w_n)|| <= sqrt(2c) V_n`. By strong convexity that
//! certifies `R_n(w_n) - R_n* <= V_n`. A failed certificate shrinks `alpha`
//! by `beta` and retries from the same iterate.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::model::{Dataset, RiskConfig};
use crate::risk::{
    add_loss_gradients, gradient_from_sum, newton_step_from, risk_gradient,
    risk_hessian, WorkCounter,
};
use crate::theory::transfer_suboptimality_bound;
use crate::trace::{EventKind, NullSink, Recorder, TraceEvent, TraceSink};

#[derive(Debug, Clone, PartialEq)]
pub struct AdaNewtonConfig {
    /// Sample size growth factor, > 1.
    pub alpha0: f64,
    /// Growth backtracking factor in (0, 1).
    pub beta: f64,
    /// Initial sample size.
    pub m0: usize,
    pub warmup_steps: usize,
    pub warmup_stepsize: f64,
    /// Attempts per growth step before falling back to fixed-size Newton steps.
    pub max_backtracks: usize,
    /// Stop early (uncertified) once this many gradient units are spent.
    pub max_grad_units: Option<u64>,
}

impl Default for AdaNewtonConfig {
    fn default() -> Self {
        AdaNewtonConfig {
            alpha0: 2.0,
            beta: 0.5,
            m0: 124,
            warmup_steps: 100,
            warmup_stepsize: 1e-3,
            max_backtracks: 10,
            max_grad_units: None,
        }
    }
}

impl AdaNewtonConfig {
    pub fn validate(&self, total: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.alpha0 <= 1.0 || !self.alpha0.is_finite() {
            return bad(format!("alpha0 must exceed 1, got {}", self.alpha0));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if self.m0 == 0 || self.m0 > total {
            return bad(format!("m0 = {} outside 1..={total}", self.m0));
        }
        if self.max_backtracks == 0 {
            return bad("max_backtracks must be at least 1".into());
        }
        if self.warmup_stepsize <= 0.0 || !self.warmup_stepsize.is_finite() {
            return bad(format!(
                "warmup stepsize must be positive, got {}",
                self.warmup_stepsize
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub w: Array1<f64>,
    /// Largest certified sample size.
    pub n: usize,
    pub work: WorkCounter,
    /// Hessian factorizations performed, including rejected attempts.
    pub hessian_inversions: u64,
    pub wall_time: f64,
}

impl SolverState {
    pub fn grad_units(&self) -> u64 {
        self.work.grad_units
    }

    pub fn hessian_units(&self) -> u64 {
        self.work.hessian_units
    }
}

/// One attempted Newton step from `w_m` on `R_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub m: usize,
    pub n: usize,
    pub w_m: Array1<f64>,
    pub w_n: Array1<f64>,
    /// Newton decrement of `R_n` at `w_m`.
    pub decrement: f64,
    /// `||grad R_n(w_n)||`.
    pub grad_norm: f64,
    pub accepted: bool,
    /// Step taken at a fixed sample size after growth backtracking gave up.
    pub fallback: bool,
}

#[derive(Debug, Clone)]
pub struct AdaNewtonRun {
    pub state: SolverState,
    pub events: Vec<TraceEvent>,
    pub steps: Vec<StepRecord>,
    /// True when the run ended at `n = N` with the certificate satisfied.
    pub certified: bool,
}

impl AdaNewtonRun {
    pub fn accepted_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.accepted).count()
    }

    pub fn backtracks(&self) -> usize {
        self.steps.iter().filter(|s| !s.accepted).count()
    }
}

/// Fixed-stepsize gradient descent on `R_{m0}` from the origin.
pub fn warmup(data: &Dataset, cfg: &RiskConfig, acfg: &AdaNewtonConfig) -> Result<SolverState> {
    acfg.validate(data.len())?;
    let m0 = acfg.m0;
    let mut w = Array1::<f64>::zeros(data.dim());
    let mut work = WorkCounter::default();
    for step in 0..acfg.warmup_steps {
        let g = risk_gradient(data, cfg, m0, w.view(), &mut work).map_err(|e| match e {
            Error::NonFinite(_) | Error::InvalidArgument(_) => Error::NonFinite(format!(
                "warmup iterate at step {step}; stepsize {} is too large for this problem",
                acfg.warmup_stepsize
            )),
            other => other,
        })?;
        w.scaled_add(-acfg.warmup_stepsize, &g);
    }
    if !w.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite(format!(
            "warmup iterate; stepsize {} is too large for this problem",
            acfg.warmup_stepsize
        )));
    }
    Ok(SolverState {
        w,
        n: m0,
        work,
        hessian_inversions: 0,
        wall_time: 0.0,
    })
}

/// Whether `||grad R_n(w)|| <= sqrt(2c) V_n`; also returns the norm.
/// Adds `n` gradient units.
pub fn certificate_holds(
    data: &Dataset,
    cfg: &RiskConfig,
    n: usize,
    w: ArrayView1<f64>,
    work: &mut WorkCounter,
) -> Result<(bool, f64)> {
    let g = risk_gradient(data, cfg, n, w, work)?;
    let gn = norm(g.view());
    Ok((gn <= cfg.certificate_threshold(n), gn))
}

/// Loss-gradient sum over the first `n` rows at a fixed point. Growing the
/// sample size from `n` to `n'` at the same point only costs `n' - n` units.
#[derive(Clone)]
struct PrefixGradient {
    n: usize,
    sum: Array1<f64>,
}

impl PrefixGradient {
    fn compute(data: &Dataset, cfg: &RiskConfig, n: usize, w: ArrayView1<f64>, work: &mut WorkCounter) -> Self {
        let mut sum = Array1::zeros(data.dim());
        add_loss_gradients(data, cfg.loss, 0..n, w, &mut sum);
        work.grad_units += n as u64;
        PrefixGradient { n, sum }
    }

    fn extended(&self, data: &Dataset, cfg: &RiskConfig, n: usize, w: ArrayView1<f64>, work: &mut WorkCounter) -> Self {
        debug_assert!(n >= self.n);
        let mut sum = self.sum.clone();
        add_loss_gradients(data, cfg.loss, self.n..n, w, &mut sum);
        work.grad_units += (n - self.n) as u64;
        PrefixGradient { n, sum }
    }
}

/// Runs the full method without observing events.
pub fn ada_newton(data: &Dataset, cfg: &RiskConfig, acfg: &AdaNewtonConfig) -> Result<AdaNewtonRun> {
    ada_newton_with_sink(data, cfg, acfg, &mut NullSink)
}

struct Attempt {
    n: usize,
    w_n: Array1<f64>,
    grad: PrefixGradient,
    grad_norm: f64,
    decrement: f64,
}

pub fn ada_newton_with_sink(
    data: &Dataset,
    cfg: &RiskConfig,
    acfg: &AdaNewtonConfig,
    sink: &mut dyn TraceSink,
) -> Result<AdaNewtonRun> {
    acfg.validate(data.len())?;
    let total = data.len();
    let mut rec = Recorder::new(sink, total);
    let origin = Array1::<f64>::zeros(data.dim());
    rec.emit(EventKind::Start, acfg.m0, WorkCounter::default(), None, None, origin.view());

    let SolverState { mut w, mut n, mut work, .. } = warmup(data, cfg, acfg)?;
    let mut grad = PrefixGradient::compute(data, cfg, n, w.view(), &mut work);
    let g0 = gradient_from_sum(cfg, n, &grad.sum, w.view())?;
    let g0_norm = norm(g0.view());
    rec.emit(EventKind::WarmupDone, n, work, Some(g0_norm), None, w.view());
    if g0_norm > cfg.certificate_threshold(n) {
        return Err(Error::InvalidInitialization {
            n,
            grad_norm: g0_norm,
            threshold: cfg.certificate_threshold(n),
        });
    }

    let mut inversions = 0u64;
    let mut steps = Vec::new();
    let mut last_norm = g0_norm;

    // One Newton step on R_target from `from`, whose prefix gradient is known,
    // followed by the certificate gradient at the new point.
    let mut newton_attempt = |from: ArrayView1<f64>,
                              from_grad: &PrefixGradient,
                              target: usize,
                              work: &mut WorkCounter|
     -> Result<Attempt> {
        let ext = from_grad.extended(data, cfg, target, from, work);
        let g = gradient_from_sum(cfg, target, &ext.sum, from)?;
        let h = risk_hessian(data, cfg, target, from, work)?;
        let step = newton_step_from(from, g, &h)?;
        inversions += 1;
        let new_grad = PrefixGradient::compute(data, cfg, target, step.new_point.view(), work);
        let gn = norm(gradient_from_sum(cfg, target, &new_grad.sum, step.new_point.view())?.view());
        Ok(Attempt {
            n: target,
            w_n: step.new_point,
            grad: new_grad,
            grad_norm: gn,
            decrement: step.decrement,
        })
    };

    let mut certified = n == total;
    while n < total {
        if acfg.max_grad_units.is_some_and(|b| work.grad_units >= b) {
            break;
        }
        let m = n;
        let w_m = w.clone();
        let mut alpha = acfg.alpha0;
        let mut accepted: Option<Attempt> = None;
        let mut last: Option<Attempt> = None;
        let mut attempts = 0;
        let mut prev_target = usize::MAX;
        while attempts < acfg.max_backtracks {
            let grown = (alpha * m as f64).ceil();
            if grown <= m as f64 {
                break;
            }
            let target = (grown as usize).min(total);
            if target >= prev_target {
                // Keep attempted sizes strictly decreasing.
                alpha *= acfg.beta;
                continue;
            }
            prev_target = target;
            attempts += 1;
            let att = newton_attempt(w_m.view(), &grad, target, &mut work)?;
            let ok = att.grad_norm <= cfg.certificate_threshold(target);
            steps.push(StepRecord {
                m,
                n: target,
                w_m: w_m.clone(),
                w_n: att.w_n.clone(),
                decrement: att.decrement,
                grad_norm: att.grad_norm,
                accepted: ok,
                fallback: false,
            });
            if ok {
                accepted = Some(att);
                break;
            }
            rec.emit(
                EventKind::StepBacktracked,
                target,
                work,
                Some(att.grad_norm),
                Some(att.decrement),
                w_m.view(),
            );
            alpha *= acfg.beta;
            last = Some(att);
        }

        if accepted.is_none() {
            // Newton iterations on the smallest attempted risk, starting from
            // the last attempt's iterate.
            let (target, mut cur_w, mut cur_grad) = match last {
                Some(a) => (a.n, a.w_n, a.grad),
                None => {
                    let target = (m + 1).min(total);
                    (target, w_m.clone(), grad.clone())
                }
            };
            let mut gn = f64::INFINITY;
            for _ in 0..acfg.max_backtracks {
                let att = newton_attempt(cur_w.view(), &cur_grad, target, &mut work)?;
                let ok = att.grad_norm <= cfg.certificate_threshold(target);
                gn = att.grad_norm;
                steps.push(StepRecord {
                    m,
                    n: target,
                    w_m: cur_w.clone(),
                    w_n: att.w_n.clone(),
                    decrement: att.decrement,
                    grad_norm: att.grad_norm,
                    accepted: ok,
                    fallback: true,
                });
                if ok {
                    accepted = Some(att);
                    break;
                }
                rec.emit(
                    EventKind::StepBacktracked,
                    target,
                    work,
                    Some(att.grad_norm),
                    Some(att.decrement),
                    att.w_n.view(),
                );
                cur_w = att.w_n;
                cur_grad = att.grad;
            }
            if accepted.is_none() {
                return Err(Error::GrowthStalled {
                    m,
                    n: target,
                    grad_norm: gn,
                });
            }
        }

        let att = accepted.expect("accepted attempt");
        w = att.w_n;
        n = att.n;
        grad = att.grad;
        last_norm = att.grad_norm;
        rec.emit(
            EventKind::StepAccepted,
            n,
            work,
            Some(att.grad_norm),
            Some(att.decrement),
            w.view(),
        );
        certified = n == total;
    }

    rec.emit(EventKind::Finished, n, work, Some(last_norm), None, w.view());
    let wall_time = rec.elapsed();
    Ok(AdaNewtonRun {
        state: SolverState {
            w,
            n,
            work,
            hessian_inversions: inversions,
            wall_time,
        },
        events: rec.events,
        steps,
        certified,
    })
}

/// Left-hand sides of the two sufficient conditions for a single Newton step
/// to carry a `V_m`-accurate point to `V_n` accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthReport {
    /// Bound on the Newton decrement of `R_n` at `w_m`; must be <= 1/4.
    pub neighborhood_lhs: f64,
    pub neighborhood_ok: bool,
    /// `144 (bound on R_n(w_m) - R_n*)²`; must be <= `V_n`.
    pub accuracy_lhs: f64,
    pub accuracy_rhs: f64,
    pub accuracy_ok: bool,
}

/// Evaluates both growth conditions with `w_star_norm` standing in for the
/// norm of the population minimizer. Diagnostic only.
///
/// The third neighborhood summand uses `(2 + sqrt 2) sqrt(c)`, which equals
/// `sqrt(2c) + 2 sqrt(c)`.
pub fn growth_conditions(cfg: &RiskConfig, m: usize, n: usize, w_star_norm: f64) -> GrowthReport {
    assert!(m >= 1 && n >= m, "growth conditions need 1 <= m <= n");
    let (vm, vn) = (cfg.accuracy(m), cfg.accuracy(n));
    let c = cfg.c;
    let (mf, nf) = (m as f64, n as f64);

    let first = (2.0 * (cfg.lipschitz + c * vm) * vm / (c * vn)).sqrt();
    let second = 2.0 * (nf - mf) / (nf * c.sqrt());
    let third = ((2.0 + 2f64.sqrt()) * c.sqrt() + c * w_star_norm) * (vm - vn) / (c * vn).sqrt();
    let neighborhood_lhs = first + second + third;

    let v_new = if n > m { cfg.accuracy(n - m) } else { 0.0 };
    let inner = vm
        + 2.0 * (nf - mf) / nf * (v_new + vm)
        + 2.0 * (vm - vn)
        + c * (vm - vn) / 2.0 * w_star_norm * w_star_norm;
    let accuracy_lhs = 144.0 * inner * inner;

    GrowthReport {
        neighborhood_lhs,
        neighborhood_ok: neighborhood_lhs <= 0.25,
        accuracy_lhs,
        accuracy_rhs: vn,
        accuracy_ok: accuracy_lhs <= vn,
    }
}

/// `144 * bound²` built from [`transfer_suboptimality_bound`]; equals
/// [`GrowthReport::accuracy_lhs`].
pub fn accuracy_condition_from_transfer(cfg: &RiskConfig, m: usize, n: usize, w_star_norm: f64) -> f64 {
    let b = transfer_suboptimality_bound(cfg, m, n, w_star_norm);
    144.0 * b * b
}

/// Smallest `c` for which `sqrt(2 alpha M / c) + 2 alpha / ((alpha - 1) sqrt c) < 1/4`
/// holds in the limit, i.e. the root of the equality.
pub fn min_regularization_for_growth(lipschitz: f64, alpha: f64) -> Result<f64> {
    if alpha <= 1.0 || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must exceed 1, got {alpha}")));
    }
    if lipschitz < 0.0 || !lipschitz.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Lipschitz constant must be non-negative, got {lipschitz}"
        )));
    }
    // linear in u = c^{-1/2}
    let slope = (2.0 * alpha * lipschitz).sqrt() + 2.0 * alpha / (alpha - 1.0);
    let root = slope / 0.25;
    Ok(root * root)
}
