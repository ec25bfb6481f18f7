//! Shared fixtures for the solver benchmarks.

use adanewton_core::{synth_logistic, Dataset, RiskConfig};

/// Normalized synthetic logistic data with the default regularization.
pub fn fixture(n: usize, p: usize) -> (Dataset, RiskConfig) {
    let mut data = synth_logistic(n, p, 1, 0.2)
        .expect("valid generator arguments")
        .shuffled(1);
    data.normalize_max_abs();
    (data, RiskConfig::logistic(200.0).expect("positive c"))
}
