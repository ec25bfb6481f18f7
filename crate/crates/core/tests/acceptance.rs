//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and fails if any criterion fails.

mod common;

use std::fs;
use std::path::Path;

use adanewton_core::adanewton::{accuracy_condition_from_transfer, growth_conditions};
use adanewton_core::baselines::reference_optimum;
use adanewton_core::harness::{run_experiment, Clock, ExperimentConfig, ExperimentReport, SolverKind};
use adanewton_core::theory::{loss_difference_decomposition, transfer_suboptimality_bound};
use adanewton_core::*;
use common::{quadratic_instance, random_vector, rng, to_na, Dense};
use nalgebra::SymmetricEigen;
use ndarray::Array1;
use rand::Rng;

struct Outcome {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn experiment_config(out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        n: 100_000,
        p: 20,
        separation: 0.2,
        normalize: true,
        c: 200.0,
        policy: PolicyKind::InverseN,
        budget_passes: 25.0,
        seed: 1,
        clock: Clock::None,
        parallel: true,
        alpha0: 2.0,
        beta: 0.5,
        m0: 124,
        warmup_steps: 100,
        warmup_stepsize: 1e-3,
        out_dir: out.to_path_buf(),
        ..Default::default()
    }
}

fn fmt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "never".into())
}

fn pass_count(report: &ExperimentReport) -> Outcome {
    let total = report.n_total as f64;
    let ada = report.outcome(SolverKind::AdaNewton).unwrap();
    let passes = ada.passes_to(1.0 / total);
    let certified = ada.certified == Some(true);
    Outcome {
        id: 1,
        name: "pass-count reproduction",
        passed: certified && passes.is_some_and(|p| p <= 3.5),
        detail: format!("{} passes to 1/N (limit 3.5), certified at N: {certified}", fmt(passes)),
    }
}

fn ordering(report: &ExperimentReport) -> Outcome {
    let target = 1.0 / report.n_total as f64;
    let p = |k| report.outcome(k).and_then(|o| o.passes_to(target));
    let (ada, newton, saga, sgd) = (
        p(SolverKind::AdaNewton),
        p(SolverKind::Newton),
        p(SolverKind::Saga),
        p(SolverKind::Sgd),
    );
    let ordered = matches!((ada, newton, saga), (Some(a), Some(n), Some(s)) if a < n && n < s);
    Outcome {
        id: 2,
        name: "solver ordering",
        passed: ordered && sgd.is_none(),
        detail: format!(
            "ada {} < newton {} < saga {}, sgd {}",
            fmt(ada),
            fmt(newton),
            fmt(saga),
            fmt(sgd)
        ),
    }
}

fn inversion_count(report: &ExperimentReport, m0: usize) -> Outcome {
    let ada = report.outcome(SolverKind::AdaNewton).unwrap();
    let total = report.n_total;
    let mut expected = 0u64;
    while (m0 << expected) < total {
        expected += 1;
    }
    let accepted_rows = ada.rows.iter().filter(|r| r.n > m0).count() as u64;
    let inversions = ada.hessian_inversions.unwrap_or(0);
    Outcome {
        id: 3,
        name: "Hessian-inversion count",
        passed: inversions == expected && accepted_rows == expected,
        detail: format!("{inversions} factorizations, {accepted_rows} accepted steps in trace, expected {expected}"),
    }
}

fn certificate_soundness() -> Outcome {
    let mut r = rng(404);
    let mut certified = 0;
    let mut violations = 0;
    for inst in 0..50u64 {
        let n = r.random_range(50..=500);
        let p = r.random_range(2..=8);
        let sep = r.random_range(0.2..2.0);
        let c = r.random_range(1.0..400.0);
        let mut data = synth_logistic(n, p, 1000 + inst, sep).unwrap();
        data.normalize_max_abs();
        let cfg = RiskConfig::logistic(c).unwrap();
        let reference = reference_optimum(&data, &cfg, n).unwrap();
        let scale = cfg.certificate_threshold(n) / cfg.reg(n);
        for _ in 0..20 {
            let e = 10f64.powf(r.random_range(-4.0..0.5));
            let u = random_vector(&mut r, p, 1.0);
            let w = &reference.w + &(u.clone() * (e * scale / u.dot(&u).sqrt()));
            let mut work = WorkCounter::default();
            let (ok, _) = certificate_holds(&data, &cfg, n, w.view(), &mut work).unwrap();
            if ok {
                certified += 1;
                let sub = risk_value(&data, &cfg, n, w.view()).unwrap() - reference.value;
                if sub > cfg.accuracy(n) {
                    violations += 1;
                }
            }
        }
    }
    Outcome {
        id: 4,
        name: "certificate soundness",
        passed: violations == 0 && certified > 0,
        detail: format!("{certified} certified points on 50 instances, {violations} violations"),
    }
}

fn decrement_contraction(report_cfg: &ExperimentConfig) -> Outcome {
    let data = report_cfg.dataset().unwrap();
    let cfg = report_cfg.risk().unwrap();
    let run = ada_newton(&data, &cfg, &report_cfg.ada(None)).unwrap();
    let mut qualifying = 0;
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for s in run.steps.iter().filter(|s| s.accepted) {
        let mut work = WorkCounter::default();
        let before = newton_decrement(&data, &cfg, s.n, s.w_m.view(), &mut work).unwrap();
        if before > 0.25 {
            continue;
        }
        let after = newton_decrement(&data, &cfg, s.n, s.w_n.view(), &mut work).unwrap();
        qualifying += 1;
        worst = worst.max(after / (before * before));
        if after > 2.1 * before * before {
            violations += 1;
        }
    }
    Outcome {
        id: 5,
        name: "decrement contraction",
        passed: violations == 0 && qualifying >= 5,
        detail: format!("{qualifying} qualifying steps, max lambda_after/lambda_before^2 = {worst:.4}, {violations} violations"),
    }
}

fn decrement_sandwich() -> Outcome {
    let mut r = rng(606);
    let mut checked = 0;
    let mut violations = 0;
    for inst in 0..20u64 {
        let n = r.random_range(100..=500);
        let p = r.random_range(2..=6);
        let mut data = synth_logistic(n, p, 2000 + inst, r.random_range(0.5..3.0)).unwrap();
        data.normalize_max_abs();
        let cfg = RiskConfig::logistic(r.random_range(1.0..50.0)).unwrap();
        let dense = Dense::new(&data, &cfg, n);
        let reference = reference_optimum(&data, &cfg, n).unwrap();
        let opt = dense.value(&to_na(&reference.w));
        for _ in 0..5 {
            let u = random_vector(&mut r, p, 1.0);
            let mut step = r.random_range(0.5..20.0);
            let (w, lambda) = loop {
                let w = &reference.w + &(&u * step);
                let lambda = dense.decrement(&to_na(&w));
                if lambda < 0.24 {
                    break (w, lambda);
                }
                step *= 0.5;
            };
            let sub = dense.value(&to_na(&w)) - opt;
            let tol = 1e-8 + 1e-6 * lambda * lambda;
            checked += 1;
            if sub < lambda * lambda / 6.0 - tol || sub > lambda * lambda + tol {
                violations += 1;
            }
        }
    }
    Outcome {
        id: 6,
        name: "decrement sandwich",
        passed: violations == 0,
        detail: format!("{checked} points with lambda < 1/4 on 20 instances, {violations} violations"),
    }
}

fn exact_algebra() -> Outcome {
    let mut r = rng(707);
    let data = synth_logistic(300, 5, 77, 1.0).unwrap();
    let mut worst_identity: f64 = 0.0;
    for _ in 0..100 {
        let n = r.random_range(2..=300);
        let m = r.random_range(1..n);
        let w = random_vector(&mut r, 5, 2.0);
        let (lhs, rhs) = loss_difference_decomposition(&data, LossModel::Logistic, m, n, w.view()).unwrap();
        worst_identity = worst_identity.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    let mut worst_accuracy: f64 = 0.0;
    for _ in 0..100 {
        let cfg = RiskConfig::new(
            r.random_range(1.0..1000.0),
            if r.random::<bool>() { AccuracyPolicy::inverse_n() } else { AccuracyPolicy::inverse_sqrt_n() },
            r.random_range(0.1..5.0),
            LossModel::Logistic,
        )
        .unwrap();
        let m = r.random_range(1..100_000);
        let n = r.random_range(m + 1..=4 * m + 1);
        let proxy = r.random_range(0.0..10.0);
        let direct = growth_conditions(&cfg, m, n, proxy).accuracy_lhs;
        let via = accuracy_condition_from_transfer(&cfg, m, n, proxy);
        let b = transfer_suboptimality_bound(&cfg, m, n, proxy);
        worst_accuracy = worst_accuracy
            .max((direct - via).abs() / via.abs())
            .max((direct - 144.0 * b * b).abs() / via.abs());
    }
    Outcome {
        id: 7,
        name: "exact algebra",
        passed: worst_identity <= 1e-12 && worst_accuracy <= 1e-12,
        detail: format!("decomposition gap {worst_identity:e}, accuracy condition gap {worst_accuracy:e}"),
    }
}

fn numerical_derivatives() -> Outcome {
    let mut r = rng(808);
    let mut worst_grad: f64 = 0.0;
    let mut worst_hess: f64 = 0.0;
    for inst in 0..20u64 {
        let n = r.random_range(20..=400);
        let p = r.random_range(1..=8);
        let data = synth_logistic(n, p, 3000 + inst, r.random_range(0.0..3.0)).unwrap();
        let cfg = RiskConfig::logistic(r.random_range(0.5..300.0)).unwrap();
        let w = random_vector(&mut r, p, 0.7);
        let mut work = WorkCounter::default();
        let g = risk_gradient(&data, &cfg, n, w.view(), &mut work).unwrap();
        let hess = risk_hessian(&data, &cfg, n, w.view(), &mut work).unwrap();
        let h = 1e-6;
        let mut fd = Array1::zeros(p);
        for i in 0..p {
            let mut a = w.clone();
            let mut b = w.clone();
            a[i] += h;
            b[i] -= h;
            fd[i] = (risk_value(&data, &cfg, n, a.view()).unwrap() - risk_value(&data, &cfg, n, b.view()).unwrap()) / (2.0 * h);
        }
        let diff = &g - &fd;
        worst_grad = worst_grad.max(diff.dot(&diff).sqrt() / g.dot(&g).sqrt().max(1e-8));
        let h = 1e-5;
        for j in 0..p {
            let mut a = w.clone();
            let mut b = w.clone();
            a[j] += h;
            b[j] -= h;
            let ga = risk_gradient(&data, &cfg, n, a.view(), &mut work).unwrap();
            let gb = risk_gradient(&data, &cfg, n, b.view(), &mut work).unwrap();
            for i in 0..p {
                worst_hess = worst_hess.max(((ga[i] - gb[i]) / (2.0 * h) - hess[[i, j]]).abs());
            }
        }
    }
    Outcome {
        id: 8,
        name: "numerical derivatives",
        passed: worst_grad <= 1e-5 && worst_hess <= 1e-4,
        detail: format!("gradient relative error {worst_grad:e}, Hessian entry error {worst_hess:e}"),
    }
}

fn convexity_floor() -> Outcome {
    let mut r = rng(909);
    let mut worst_margin = f64::INFINITY;
    let mut evaluated = 0;
    for inst in 0..20u64 {
        let n = r.random_range(10..=400);
        let p = r.random_range(1..=10);
        let data = synth_logistic(n, p, 4000 + inst, r.random_range(0.0..3.0)).unwrap();
        let cfg = RiskConfig::logistic(r.random_range(0.1..500.0)).unwrap();
        for scale in [0.0, 0.5, 5.0, 100.0] {
            let w = random_vector(&mut r, p, scale);
            let m = r.random_range(1..=n);
            let h = risk_hessian(&data, &cfg, m, w.view(), &mut WorkCounter::default()).unwrap();
            let hm = nalgebra::DMatrix::from_fn(p, p, |i, j| h[[i, j]]);
            let min = SymmetricEigen::new(hm).eigenvalues.min();
            worst_margin = worst_margin.min(min - (cfg.reg(m) - 1e-10));
            evaluated += 1;
        }
    }
    Outcome {
        id: 9,
        name: "strong convexity floor",
        passed: worst_margin >= 0.0,
        detail: format!("{evaluated} Hessians, smallest lambda_min - (cV_n - 1e-10) = {worst_margin:e}"),
    }
}

fn growth_constant() -> Outcome {
    let c = min_regularization_for_growth(1.0, 2.0).unwrap();
    let formula = 64.0 * (1f64.sqrt() + 2.0).powi(2);
    Outcome {
        id: 10,
        name: "minimum regularization constant",
        passed: c == 576.0 && formula == 576.0,
        detail: format!("c = {c}, 64(sqrt(M)+2)^2 = {formula}"),
    }
}

fn quadratic_one_step() -> Outcome {
    let mut r = rng(1111);
    let mut worst_grad: f64 = 0.0;
    let mut worst_ref: f64 = 0.0;
    for inst in 0..10u64 {
        let n = r.random_range(5..=300);
        let p = r.random_range(1..=8);
        let data = quadratic_instance(5000 + inst, n, p);
        let cfg = RiskConfig::new(r.random_range(0.1..100.0), AccuracyPolicy::inverse_n(), 1.0, LossModel::Quadratic).unwrap();
        let w0 = random_vector(&mut r, p, 10.0);
        let mut work = WorkCounter::default();
        let step = newton_step(&data, &cfg, n, w0.view(), &mut work).unwrap();
        let g = risk_gradient(&data, &cfg, n, step.new_point.view(), &mut work).unwrap();
        worst_grad = worst_grad.max(g.dot(&g).sqrt());
        let closed = Dense::new(&data, &cfg, n).quadratic_minimizer();
        let reference = reference_optimum(&data, &cfg, n).unwrap();
        for (a, b) in reference.w.iter().zip(closed.iter()) {
            worst_ref = worst_ref.max((a - b).abs());
        }
    }
    Outcome {
        id: 11,
        name: "one-step quadratic",
        passed: worst_grad <= 1e-10 && worst_ref <= 1e-10,
        detail: format!("gradient after one step {worst_grad:e}, reference vs closed form {worst_ref:e}"),
    }
}

fn read_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism(first_dir: &Path, cfg: &ExperimentConfig) -> Outcome {
    let second = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        out_dir: second.path().to_path_buf(),
        ..cfg.clone()
    };
    run_experiment(&cfg).unwrap();
    let a = read_outputs(first_dir);
    let b = read_outputs(second.path());
    Outcome {
        id: 12,
        name: "determinism",
        passed: !a.is_empty() && a == b,
        detail: format!("{} CSV files compared byte for byte", a.len()),
    }
}

#[test]
fn acceptance_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = experiment_config(dir.path());
    let report = run_experiment(&cfg).unwrap();

    let outcomes = vec![
        pass_count(&report),
        ordering(&report),
        inversion_count(&report, cfg.m0),
        certificate_soundness(),
        decrement_contraction(&cfg),
        decrement_sandwich(),
        exact_algebra(),
        numerical_derivatives(),
        convexity_floor(),
        growth_constant(),
        quadratic_one_step(),
        determinism(dir.path(), &cfg),
    ];
    for o in &outcomes {
        println!(
            "{} {:>2} {}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.detail
        );
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
