//! Datasets, per-sample losses and statistical accuracy policies.

mod dataset;
mod io;
mod loss;
mod policy;
mod synth;

pub use dataset::Dataset;
pub use io::{load_csv, load_libsvm, write_csv, write_libsvm};
pub use loss::{sigmoid, softplus, LossModel};
pub use policy::{AccuracyPolicy, PolicyKind};
pub use synth::{synth_logistic, synth_logistic_with_truth};

use crate::error::{Error, Result};

/// Parameters of the regularized risk `R_n(w) = L_n(w) + (c V_n / 2) ||w||²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskConfig {
    /// Regularization constant `c`.
    pub c: f64,
    pub policy: AccuracyPolicy,
    /// Lipschitz constant `M` of the per-sample gradients. Only the
    /// diagnostics read it.
    pub lipschitz: f64,
    pub loss: LossModel,
}

impl RiskConfig {
    pub fn new(c: f64, policy: AccuracyPolicy, lipschitz: f64, loss: LossModel) -> Result<Self> {
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("c must be positive, got {c}")));
        }
        if lipschitz <= 0.0 || !lipschitz.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Lipschitz constant must be positive, got {lipschitz}"
            )));
        }
        Ok(RiskConfig {
            c,
            policy,
            lipschitz,
            loss,
        })
    }

    /// Logistic loss with `V_n = 1/n` and a unit Lipschitz placeholder.
    pub fn logistic(c: f64) -> Result<Self> {
        Self::new(c, AccuracyPolicy::inverse_n(), 1.0, LossModel::Logistic)
    }

    pub fn with_lipschitz(mut self, lipschitz: f64) -> Result<Self> {
        self = Self::new(self.c, self.policy, lipschitz, self.loss)?;
        Ok(self)
    }

    /// `V_n`.
    #[inline]
    pub fn accuracy(&self, n: usize) -> f64 {
        self.policy.at(n)
    }

    /// Strong convexity modulus `c V_n` of `R_n`.
    #[inline]
    pub fn reg(&self, n: usize) -> f64 {
        self.c * self.policy.at(n)
    }

    /// Certificate threshold `sqrt(2c) V_n` on the gradient norm.
    #[inline]
    pub fn certificate_threshold(&self, n: usize) -> f64 {
        (2.0 * self.c).sqrt() * self.policy.at(n)
    }
}
