//! Regularized empirical risk over a prefix of the dataset:
//! `R_n(w) = (1/n) sum_{k<n} f(w; x_k, y_k) + (c V_n / 2) ||w||²`.
//!
//! Per-sample sums run sequentially in row order so results are
//! bit-reproducible.

use std::ops::Range;

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, dot, Cholesky};
use crate::model::{Dataset, LossModel, RiskConfig};

/// Work performed so far, in per-sample units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkCounter {
    /// Per-sample gradient evaluations (objective evaluations count here too).
    pub grad_units: u64,
    /// Per-sample Hessian evaluations.
    pub hessian_units: u64,
}

impl WorkCounter {
    pub fn passes(&self, total: usize) -> f64 {
        self.grad_units as f64 / total as f64
    }

    pub fn hessian_passes(&self, total: usize) -> f64 {
        self.hessian_units as f64 / total as f64
    }
}

/// Value, gradient and optionally the Hessian of `R_n` at one point.
#[derive(Debug, Clone)]
pub struct RiskEval {
    pub value: f64,
    pub gradient: Array1<f64>,
    pub hessian: Option<Array2<f64>>,
    pub n: usize,
}

#[derive(Debug, Clone)]
pub struct NewtonStepResult {
    /// `w - direction`.
    pub new_point: Array1<f64>,
    /// Newton decrement `sqrt(<grad, direction>)` at the starting point.
    pub decrement: f64,
    /// `H_n^{-1} grad R_n(w)`.
    pub direction: Array1<f64>,
    pub gradient: Array1<f64>,
}

pub(crate) fn check_args(data: &Dataset, n: usize, w: ArrayView1<f64>) -> Result<()> {
    if n == 0 || n > data.len() {
        return Err(Error::InvalidArgument(format!(
            "sample size {n} outside 1..={}",
            data.len()
        )));
    }
    if w.len() != data.dim() {
        return Err(Error::InvalidArgument(format!(
            "point has dimension {} but data has {}",
            w.len(),
            data.dim()
        )));
    }
    if !all_finite(w) {
        return Err(Error::NonFinite("risk argument".into()));
    }
    Ok(())
}

#[inline]
fn row(data: &Dataset, k: usize) -> &[f64] {
    data.features()
        .row(k)
        .to_slice()
        .expect("dataset rows are contiguous")
}

#[inline]
fn margin(w: &[f64], x: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, b) in w.iter().zip(x) {
        s += a * b;
    }
    s
}

fn as_slice<'a>(w: &'a ArrayView1<f64>) -> std::borrow::Cow<'a, [f64]> {
    match w.as_slice() {
        Some(s) => std::borrow::Cow::Borrowed(s),
        None => std::borrow::Cow::Owned(w.to_vec()),
    }
}

/// Sum of per-sample losses over `rows`.
pub fn loss_sum(data: &Dataset, loss: LossModel, rows: Range<usize>, w: ArrayView1<f64>) -> f64 {
    let w = as_slice(&w);
    let mut s = 0.0;
    for k in rows {
        s += loss.value(margin(&w, row(data, k)), data.label(k));
    }
    s
}

/// Adds the per-sample loss gradients over `rows` into `acc`.
pub fn add_loss_gradients(
    data: &Dataset,
    loss: LossModel,
    rows: Range<usize>,
    w: ArrayView1<f64>,
    acc: &mut Array1<f64>,
) {
    let w = as_slice(&w);
    let acc = acc.as_slice_mut().expect("accumulator is contiguous");
    for k in rows {
        let x = row(data, k);
        let s = loss.derivative(margin(&w, x), data.label(k));
        for (a, v) in acc.iter_mut().zip(x) {
            *a += s * v;
        }
    }
}

/// Sum over `rows` of per-sample Hessians, upper triangle mirrored.
fn loss_hessian_sum(data: &Dataset, loss: LossModel, rows: Range<usize>, w: ArrayView1<f64>) -> Array2<f64> {
    let p = data.dim();
    let w = as_slice(&w);
    let mut upper = vec![0.0; p * p];
    for k in rows {
        let x = row(data, k);
        let s = loss.curvature(margin(&w, x), data.label(k));
        if s == 0.0 {
            continue;
        }
        for i in 0..p {
            let a = s * x[i];
            let r = &mut upper[i * p..(i + 1) * p];
            for j in i..p {
                r[j] += a * x[j];
            }
        }
    }
    Array2::from_shape_fn((p, p), |(i, j)| {
        if i <= j {
            upper[i * p + j]
        } else {
            upper[j * p + i]
        }
    })
}

fn finite_or(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

/// Builds `grad R_n(w)` from an already accumulated loss-gradient sum over the
/// first `n` rows.
pub(crate) fn gradient_from_sum(cfg: &RiskConfig, n: usize, sum: &Array1<f64>, w: ArrayView1<f64>) -> Result<Array1<f64>> {
    let reg = cfg.reg(n);
    let inv = 1.0 / n as f64;
    let g = Array1::from_shape_fn(w.len(), |i| sum[i] * inv + reg * w[i]);
    if !all_finite(g.view()) {
        return Err(Error::NonFinite("risk gradient".into()));
    }
    Ok(g)
}

/// `R_n(w)`. Does not touch any work counter; callers that count objective
/// evaluations add the units themselves.
pub fn risk_value(data: &Dataset, cfg: &RiskConfig, n: usize, w: ArrayView1<f64>) -> Result<f64> {
    check_args(data, n, w)?;
    let l = loss_sum(data, cfg.loss, 0..n, w) / n as f64;
    finite_or(l + 0.5 * cfg.reg(n) * dot(w, w), "risk value")
}

/// `grad R_n(w)`; adds `n` gradient units.
pub fn risk_gradient(
    data: &Dataset,
    cfg: &RiskConfig,
    n: usize,
    w: ArrayView1<f64>,
    work: &mut WorkCounter,
) -> Result<Array1<f64>> {
    check_args(data, n, w)?;
    let mut sum = Array1::zeros(data.dim());
    add_loss_gradients(data, cfg.loss, 0..n, w, &mut sum);
    work.grad_units += n as u64;
    gradient_from_sum(cfg, n, &sum, w)
}

/// `grad² R_n(w)`; adds `n` Hessian units. Smallest eigenvalue is at least
/// `c V_n` since every sample Hessian is positive semidefinite.
pub fn risk_hessian(
    data: &Dataset,
    cfg: &RiskConfig,
    n: usize,
    w: ArrayView1<f64>,
    work: &mut WorkCounter,
) -> Result<Array2<f64>> {
    check_args(data, n, w)?;
    let mut h = loss_hessian_sum(data, cfg.loss, 0..n, w);
    work.hessian_units += n as u64;
    let inv = 1.0 / n as f64;
    h.mapv_inplace(|v| v * inv);
    let reg = cfg.reg(n);
    for i in 0..h.nrows() {
        h[[i, i]] += reg;
    }
    if !h.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("risk Hessian".into()));
    }
    Ok(h)
}

/// Value, gradient and (optionally) Hessian in one call. Counts `n`
/// gradient units, plus `n` Hessian units when the Hessian is requested.
pub fn evaluate(
    data: &Dataset,
    cfg: &RiskConfig,
    n: usize,
    w: ArrayView1<f64>,
    with_hessian: bool,
    work: &mut WorkCounter,
) -> Result<RiskEval> {
    let value = risk_value(data, cfg, n, w)?;
    let gradient = risk_gradient(data, cfg, n, w, work)?;
    let hessian = if with_hessian {
        Some(risk_hessian(data, cfg, n, w, work)?)
    } else {
        None
    };
    Ok(RiskEval {
        value,
        gradient,
        hessian,
        n,
    })
}

/// Newton step from a known gradient and Hessian.
pub(crate) fn newton_step_from(
    w: ArrayView1<f64>,
    gradient: Array1<f64>,
    hessian: &Array2<f64>,
) -> Result<NewtonStepResult> {
    let direction = Cholesky::factor(hessian)?.solve(gradient.view());
    let dec2 = dot(gradient.view(), direction.view());
    let new_point = &w - &direction;
    if !all_finite(new_point.view()) {
        return Err(Error::NonFinite("Newton iterate".into()));
    }
    Ok(NewtonStepResult {
        new_point,
        decrement: dec2.max(0.0).sqrt(),
        direction,
        gradient,
    })
}

/// Unit-step Newton update `w - H_n^{-1} grad R_n(w)`.
pub fn newton_step(
    data: &Dataset,
    cfg: &RiskConfig,
    n: usize,
    w: ArrayView1<f64>,
    work: &mut WorkCounter,
) -> Result<NewtonStepResult> {
    let g = risk_gradient(data, cfg, n, w, work)?;
    let h = risk_hessian(data, cfg, n, w, work)?;
    newton_step_from(w, g, &h)
}

/// `sqrt(grad R_nᵀ H_n^{-1} grad R_n)` at `w`.
pub fn newton_decrement(
    data: &Dataset,
    cfg: &RiskConfig,
    n: usize,
    w: ArrayView1<f64>,
    work: &mut WorkCounter,
) -> Result<f64> {
    newton_step(data, cfg, n, w, work).map(|s| s.decrement)
}
