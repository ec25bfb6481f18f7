//! Adaptive sample size Newton method for regularized empirical risk
//! minimization, with first- and second-order baselines and an experiment
//! harness.

pub mod adanewton;
pub mod baselines;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod risk;
pub mod theory;
pub mod trace;

pub use ndarray;

pub use adanewton::{
    ada_newton, ada_newton_with_sink, certificate_holds, growth_conditions, min_regularization_for_growth,
    warmup, AdaNewtonConfig, AdaNewtonRun, GrowthReport, SolverState, StepRecord,
};
pub use error::{Error, Result};
pub use model::{
    synth_logistic, synth_logistic_with_truth, AccuracyPolicy, Dataset, LossModel, PolicyKind, RiskConfig,
};
pub use risk::{
    evaluate, newton_decrement, newton_step, risk_gradient, risk_hessian, risk_value, NewtonStepResult,
    RiskEval, WorkCounter,
};
pub use trace::{EventKind, NullSink, TraceEvent, TraceSink};
