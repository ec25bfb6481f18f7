//! Comparison solvers and the high-accuracy reference solver.

mod newton;
mod reference;
mod saga;
mod sgd;

pub use newton::{newton_linesearch, LineSearchConfig};
pub use reference::{reference_optimum, Reference, ReferenceCache};
pub use saga::{saga, Saga, SagaConfig};
pub use sgd::{sgd, SgdConfig};

use ndarray::Array1;

use crate::risk::WorkCounter;
use crate::trace::TraceEvent;

/// Final iterate and trace of a baseline run.
#[derive(Debug, Clone)]
pub struct BaselineRun {
    pub w: Array1<f64>,
    pub work: WorkCounter,
    pub events: Vec<TraceEvent>,
}
