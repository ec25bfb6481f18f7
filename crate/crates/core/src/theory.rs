//! Diagnostic bounds for the adaptive sample size analysis.

use ndarray::ArrayView1;

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::model::{AccuracyPolicy, Dataset, LossModel, RiskConfig};
use crate::risk::{check_args, loss_sum, newton_decrement, risk_value, WorkCounter};

/// Measurements around one Newton step from `w_m` on `R_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepAudit {
    pub m: usize,
    pub n: usize,
    /// Newton decrement of `R_n` at `w_m`.
    pub lambda_before: f64,
    /// Newton decrement of `R_n` at `w_n`.
    pub lambda_after: f64,
    /// `R_n(w_m) - R_n*`, when a reference optimum was supplied.
    pub sub_before: Option<f64>,
    pub sub_after: Option<f64>,
    /// `144 sub_before²`, when available.
    pub bound_144: Option<f64>,
    /// Transfer bound with `||w_n||` as the norm proxy.
    pub bound_transfer: f64,
    /// `lambda_after <= 2.1 lambda_before²`; only meaningful for `lambda_before <= 1/4`.
    pub contraction_ok: bool,
    pub bound_144_ok: Option<bool>,
}

/// Both sides of `L_n(w) - L_m(w) = ((n-m)/n) [mean over rows m..n - mean over rows 0..m]`.
pub fn loss_difference_decomposition(
    data: &Dataset,
    loss: LossModel,
    m: usize,
    n: usize,
    w: ArrayView1<f64>,
) -> Result<(f64, f64)> {
    if m == 0 || m >= n {
        return Err(Error::InvalidArgument(format!("need 1 <= m < n, got m = {m}, n = {n}")));
    }
    check_args(data, n, w)?;
    let head = loss_sum(data, loss, 0..m, w);
    let tail = loss_sum(data, loss, m..n, w);
    let (mf, nf) = (m as f64, n as f64);
    let lhs = (head + tail) / nf - head / mf;
    let rhs = (nf - mf) / nf * (tail / (nf - mf) - head / mf);
    Ok((lhs, rhs))
}

/// `((n-m)/n) (V_{n-m} + V_m)`, the high-probability envelope on `|L_n - L_m|`.
pub fn loss_difference_envelope(policy: &AccuracyPolicy, m: usize, n: usize) -> Result<f64> {
    if m == 0 || m >= n {
        return Err(Error::InvalidArgument(format!("need 1 <= m < n, got m = {m}, n = {n}")));
    }
    let frac = (n - m) as f64 / n as f64;
    Ok(frac * (policy.accuracy(n - m)? + policy.accuracy(m)?))
}

/// `sqrt(4/c + proxy²)`, a bound on the norm of the regularized minimizer.
pub fn regularized_optimum_norm_bound(cfg: &RiskConfig, w_star_norm: f64) -> f64 {
    (4.0 / cfg.c + w_star_norm * w_star_norm).sqrt()
}

/// Upper bound on `R_n(w_m) - R_n*` for a `V_m`-accurate `w_m`:
/// `V_m + (2(n-m)/n)(V_{n-m} + V_m) + 2(V_m - V_n) + (c(V_m - V_n)/2) proxy²`.
/// `m = n` is allowed and gives `V_m`.
pub fn transfer_suboptimality_bound(cfg: &RiskConfig, m: usize, n: usize, w_star_norm: f64) -> f64 {
    assert!(m >= 1 && n >= m, "transfer bound needs 1 <= m <= n");
    let (vm, vn) = (cfg.accuracy(m), cfg.accuracy(n));
    let growth = if n > m {
        2.0 * (n - m) as f64 / n as f64 * (cfg.accuracy(n - m) + vm)
    } else {
        0.0
    };
    vm + growth + 2.0 * (vm - vn) + cfg.c * (vm - vn) / 2.0 * w_star_norm * w_star_norm
}

/// Audits one step. `reference` is `R_n*` when known.
/// Never touches solver state; work spent here is not reported.
pub fn audit_step(
    data: &Dataset,
    cfg: &RiskConfig,
    m: usize,
    n: usize,
    w_m: ArrayView1<f64>,
    w_n: ArrayView1<f64>,
    reference: Option<f64>,
) -> Result<StepAudit> {
    let mut scratch = WorkCounter::default();
    let lambda_before = newton_decrement(data, cfg, n, w_m, &mut scratch)?;
    let lambda_after = newton_decrement(data, cfg, n, w_n, &mut scratch)?;
    let bound_transfer = transfer_suboptimality_bound(cfg, m.min(n), n, norm(w_n));

    let (sub_before, sub_after, bound_144, bound_144_ok) = match reference {
        Some(opt) => {
            let before = risk_value(data, cfg, n, w_m)? - opt;
            let after = risk_value(data, cfg, n, w_n)? - opt;
            let bound = 144.0 * before * before;
            let tol = 1e-9 * (1.0 + before * before);
            (Some(before), Some(after), Some(bound), Some(after <= bound + tol))
        }
        None => (None, None, None, None),
    };

    Ok(StepAudit {
        m,
        n,
        lambda_before,
        lambda_after,
        sub_before,
        sub_after,
        bound_144,
        bound_transfer,
        contraction_ok: lambda_after <= 2.1 * lambda_before * lambda_before + 1e-12,
        bound_144_ok,
    })
}

/// Lipschitz constant of the per-sample gradients: `max_i ||x_i||²` times the
/// loss's curvature ceiling.
pub fn estimate_lipschitz(data: &Dataset, loss: LossModel) -> f64 {
    let max_sq = data
        .features()
        .rows()
        .into_iter()
        .map(|r| r.dot(&r))
        .fold(0.0, f64::max);
    max_sq * loss.max_curvature()
}
