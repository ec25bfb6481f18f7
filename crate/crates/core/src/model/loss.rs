use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::linalg::dot;

/// Per-sample loss as a function of the margin `<w, x>` and the label.
///
/// Both kinds are generalized linear: the sample gradient is
/// `derivative(margin, y) * x` and the sample Hessian is
/// `curvature(margin, y) * x xᵀ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossModel {
    /// `ln(1 + exp(-y <w,x>))`, labels in {-1, +1}.
    Logistic,
    /// `½ (<w,x> - y)²`; used mostly as an exactly solvable test model.
    Quadratic,
}

/// `ln(1 + e^z)` without overflow.
#[inline]
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Logistic sigmoid, branch-wise so neither tail overflows.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LossModel {
    #[inline]
    pub fn value(self, margin: f64, y: f64) -> f64 {
        match self {
            LossModel::Logistic => softplus(-y * margin),
            LossModel::Quadratic => 0.5 * (margin - y) * (margin - y),
        }
    }

    /// Derivative of the loss with respect to the margin.
    #[inline]
    pub fn derivative(self, margin: f64, y: f64) -> f64 {
        match self {
            LossModel::Logistic => -y * sigmoid(-y * margin),
            LossModel::Quadratic => margin - y,
        }
    }

    /// Second derivative with respect to the margin; never negative.
    #[inline]
    pub fn curvature(self, margin: f64, y: f64) -> f64 {
        match self {
            LossModel::Logistic => {
                let t = y * margin;
                sigmoid(t) * sigmoid(-t)
            }
            LossModel::Quadratic => 1.0,
        }
    }

    pub fn sample_value(self, w: ArrayView1<f64>, x: ArrayView1<f64>, y: f64) -> f64 {
        self.value(dot(w, x), y)
    }

    pub fn sample_gradient(self, w: ArrayView1<f64>, x: ArrayView1<f64>, y: f64) -> Array1<f64> {
        let s = self.derivative(dot(w, x), y);
        x.mapv(|v| s * v)
    }

    pub fn sample_hessian(self, w: ArrayView1<f64>, x: ArrayView1<f64>, y: f64) -> Array2<f64> {
        let s = self.curvature(dot(w, x), y);
        let p = x.len();
        Array2::from_shape_fn((p, p), |(i, j)| s * x[i] * x[j])
    }

    /// Upper bound on the curvature over all margins, used for Lipschitz
    /// constants: 1/4 for logistic, 1 for quadratic.
    pub fn max_curvature(self) -> f64 {
        match self {
            LossModel::Logistic => 0.25,
            LossModel::Quadratic => 1.0,
        }
    }
}
