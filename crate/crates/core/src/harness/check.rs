use ndarray::{Array1, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use crate::adanewton::certificate_holds;
use crate::baselines::{newton_linesearch, reference_optimum, LineSearchConfig};
use crate::error::Result;
use crate::linalg::Cholesky;
use crate::model::{Dataset, RiskConfig};
use crate::risk::{newton_decrement, risk_gradient, risk_hessian, risk_value, WorkCounter};
use crate::theory::loss_difference_decomposition;
use crate::trace::TraceEvent;

/// Rows of the dataset the checks run on.
const SLICE: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn result(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

/// Derivative, convexity and certificate checks on the first few hundred
/// rows of the configured dataset.
pub fn run_checks(cfg: &ExperimentConfig) -> Result<Vec<CheckResult>> {
    cfg.validate()?;
    let full = cfg.dataset()?;
    let n = full.len().min(SLICE);
    let data = full.prefix(n)?;
    let risk = cfg.risk()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w: Array1<f64> = (0..data.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();

    let mut out = vec![
        gradient_check(&data, &risk, n, w.view())?,
        hessian_check(&data, &risk, n, w.view())?,
        convexity_check(&data, &risk, n, w.view())?,
    ];
    if n >= 2 {
        let m = (n / 3).max(1);
        let (lhs, rhs) = loss_difference_decomposition(&data, risk.loss, m, n, w.view())?;
        let err = (lhs - rhs).abs() / (1.0 + lhs.abs());
        out.push(result("loss_decomposition", err <= 1e-12, format!("relative gap {err:e}")));
    }
    out.extend(certificate_checks(&data, &risk, n)?);
    Ok(out)
}

fn gradient_check(data: &Dataset, risk: &RiskConfig, n: usize, w: ArrayView1<f64>) -> Result<CheckResult> {
    let g = risk_gradient(data, risk, n, w, &mut WorkCounter::default())?;
    let h = 1e-6;
    let mut worst = 0.0f64;
    for i in 0..w.len() {
        let mut a = w.to_owned();
        let mut b = w.to_owned();
        a[i] += h;
        b[i] -= h;
        let fd = (risk_value(data, risk, n, a.view())? - risk_value(data, risk, n, b.view())?) / (2.0 * h);
        worst = worst.max((fd - g[i]).abs() / (1e-8 + g[i].abs().max(fd.abs())));
    }
    Ok(result("gradient_fd", worst <= 1e-5, format!("max relative error {worst:e}")))
}

fn hessian_check(data: &Dataset, risk: &RiskConfig, n: usize, w: ArrayView1<f64>) -> Result<CheckResult> {
    let mut scratch = WorkCounter::default();
    let hess = risk_hessian(data, risk, n, w, &mut scratch)?;
    let h = 1e-5;
    let mut worst = 0.0f64;
    for j in 0..w.len() {
        let mut a = w.to_owned();
        let mut b = w.to_owned();
        a[j] += h;
        b[j] -= h;
        let ga = risk_gradient(data, risk, n, a.view(), &mut scratch)?;
        let gb = risk_gradient(data, risk, n, b.view(), &mut scratch)?;
        for i in 0..w.len() {
            worst = worst.max(((ga[i] - gb[i]) / (2.0 * h) - hess[[i, j]]).abs());
        }
    }
    Ok(result("hessian_fd", worst <= 1e-4, format!("max entry error {worst:e}")))
}

fn convexity_check(data: &Dataset, risk: &RiskConfig, n: usize, w: ArrayView1<f64>) -> Result<CheckResult> {
    let mut h = risk_hessian(data, risk, n, w, &mut WorkCounter::default())?;
    let floor = risk.reg(n) - 1e-10;
    for i in 0..h.nrows() {
        h[[i, i]] -= floor;
    }
    let ok = Cholesky::factor(&h).is_ok();
    Ok(result("strong_convexity", ok, format!("H - (cV_n - 1e-10) I positive definite: {ok}")))
}

/// Walks a damped Newton path from the origin; every iterate that passes the
/// certificate must be `V_n`-suboptimal, and iterates inside the quadratic
/// region must satisfy `lambda²/6 <= subopt <= lambda²`.
fn certificate_checks(data: &Dataset, risk: &RiskConfig, n: usize) -> Result<Vec<CheckResult>> {
    let reference = reference_optimum(data, risk, n)?;
    let mut path: Vec<Array1<f64>> = Vec::new();
    let mut sink = |_: &TraceEvent, w: ArrayView1<f64>| path.push(w.to_owned());
    let w0 = Array1::<f64>::zeros(data.dim());
    newton_linesearch(data, risk, n, w0.view(), &LineSearchConfig::default(), 1e-12, None, &mut sink)?;

    let vn = risk.accuracy(n);
    let mut certified = 0;
    let mut cert_violations = 0;
    let mut sandwich = 0;
    let mut sandwich_violations = 0;
    let mut scratch = WorkCounter::default();
    for w in &path {
        let sub = risk_value(data, risk, n, w.view())? - reference.value;
        let (ok, _) = certificate_holds(data, risk, n, w.view(), &mut scratch)?;
        if ok {
            certified += 1;
            if sub > vn {
                cert_violations += 1;
            }
        }
        let lambda = newton_decrement(data, risk, n, w.view(), &mut scratch)?;
        if lambda < 0.25 {
            sandwich += 1;
            let tol = 1e-8 + 1e-6 * lambda * lambda;
            if sub < lambda * lambda / 6.0 - tol || sub > lambda * lambda + tol {
                sandwich_violations += 1;
            }
        }
    }
    Ok(vec![
        result(
            "certificate_soundness",
            cert_violations == 0,
            format!("{certified} certified iterates, {cert_violations} violations; reference gradient norm {:e}", reference.grad_norm),
        ),
        result(
            "decrement_sandwich",
            sandwich_violations == 0,
            format!("{sandwich} iterates with lambda < 1/4, {sandwich_violations} violations"),
        ),
    ])
}
