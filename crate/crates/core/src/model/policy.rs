use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// `V_n = scale / n`
    InverseN,
    /// `V_n = scale / sqrt(n)`
    InverseSqrtN,
}

/// Statistical accuracy `V_n` as a function of the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyPolicy {
    pub kind: PolicyKind,
    pub scale: f64,
}

impl Default for AccuracyPolicy {
    fn default() -> Self {
        AccuracyPolicy {
            kind: PolicyKind::InverseN,
            scale: 1.0,
        }
    }
}

impl AccuracyPolicy {
    pub fn new(kind: PolicyKind, scale: f64) -> Result<Self> {
        if scale <= 0.0 || !scale.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "accuracy scale must be positive, got {scale}"
            )));
        }
        Ok(AccuracyPolicy { kind, scale })
    }

    pub fn inverse_n() -> Self {
        AccuracyPolicy::default()
    }

    pub fn inverse_sqrt_n() -> Self {
        AccuracyPolicy {
            kind: PolicyKind::InverseSqrtN,
            scale: 1.0,
        }
    }

    /// `V_n`; sample size zero is rejected.
    pub fn accuracy(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "statistical accuracy is undefined for n = 0".into(),
            ));
        }
        Ok(self.at(n))
    }

    /// `V_n` for callers that already guarantee `n >= 1`.
    #[inline]
    pub(crate) fn at(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        let n = n as f64;
        match self.kind {
            PolicyKind::InverseN => self.scale / n,
            PolicyKind::InverseSqrtN => self.scale / n.sqrt(),
        }
    }
}
