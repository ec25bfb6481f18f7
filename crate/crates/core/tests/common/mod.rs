//! Independent reference implementations built on nalgebra.
#![allow(dead_code)]

use adanewton_core::{Dataset, LossModel, RiskConfig};
use nalgebra::{DMatrix, DVector};
use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub struct Dense {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub c: f64,
    pub vn: f64,
    pub logistic: bool,
}

impl Dense {
    pub fn new(data: &Dataset, cfg: &RiskConfig, n: usize) -> Self {
        let p = data.dim();
        let x = DMatrix::from_fn(n, p, |i, j| data.features()[[i, j]]);
        let y = DVector::from_fn(n, |i, _| data.labels()[i]);
        Dense {
            x,
            y,
            c: cfg.c,
            vn: cfg.accuracy(n),
            logistic: cfg.loss == LossModel::Logistic,
        }
    }

    fn n(&self) -> f64 {
        self.x.nrows() as f64
    }

    pub fn value(&self, w: &DVector<f64>) -> f64 {
        let z = &self.x * w;
        let mut total = 0.0;
        for i in 0..z.len() {
            total += if self.logistic {
                let t = -self.y[i] * z[i];
                if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() }
            } else {
                0.5 * (z[i] - self.y[i]).powi(2)
            };
        }
        total / self.n() + 0.5 * self.c * self.vn * w.norm_squared()
    }

    pub fn gradient(&self, w: &DVector<f64>) -> DVector<f64> {
        let z = &self.x * w;
        let s = DVector::from_fn(z.len(), |i, _| {
            if self.logistic {
                -self.y[i] * logistic(-self.y[i] * z[i])
            } else {
                z[i] - self.y[i]
            }
        });
        self.x.transpose() * s / self.n() + w * (self.c * self.vn)
    }

    pub fn hessian(&self, w: &DVector<f64>) -> DMatrix<f64> {
        let z = &self.x * w;
        let d = DVector::from_fn(z.len(), |i, _| {
            if self.logistic {
                logistic(z[i]) * logistic(-z[i])
            } else {
                1.0
            }
        });
        let scaled = DMatrix::from_fn(self.x.nrows(), self.x.ncols(), |i, j| self.x[(i, j)] * d[i]);
        let p = self.x.ncols();
        self.x.transpose() * scaled / self.n() + DMatrix::identity(p, p) * (self.c * self.vn)
    }

    /// Closed-form minimizer for the quadratic loss.
    pub fn quadratic_minimizer(&self) -> DVector<f64> {
        let p = self.x.ncols();
        let a = self.x.transpose() * &self.x / self.n() + DMatrix::identity(p, p) * (self.c * self.vn);
        let b = self.x.transpose() * &self.y / self.n();
        a.lu().solve(&b).expect("nonsingular")
    }

    pub fn decrement(&self, w: &DVector<f64>) -> f64 {
        let g = self.gradient(w);
        let d = self.hessian(w).lu().solve(&g).expect("nonsingular");
        g.dot(&d).max(0.0).sqrt()
    }
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

pub fn to_na(w: &Array1<f64>) -> DVector<f64> {
    DVector::from_iterator(w.len(), w.iter().copied())
}

pub fn to_nd(w: &DVector<f64>) -> Array1<f64> {
    w.iter().copied().collect()
}

pub fn random_vector(rng: &mut ChaCha8Rng, p: usize, scale: f64) -> Array1<f64> {
    (0..p).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real-valued regression targets for quadratic-loss instances.
pub fn quadratic_instance(seed: u64, n: usize, p: usize) -> Dataset {
    let mut r = rng(seed);
    let x = ndarray::Array2::from_shape_fn((n, p), |_| r.sample::<f64, _>(StandardNormal));
    let y = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
    Dataset::with_targets(x, y, seed).unwrap()
}
