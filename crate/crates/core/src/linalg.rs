//! Dense symmetric positive-definite factorization and small vector helpers.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor `L` with `H = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    lower: Array2<f64>,
}

impl Cholesky {
    /// Factorizes a symmetric matrix. Only the lower triangle is read.
    pub fn factor(h: &Array2<f64>) -> Result<Self> {
        let p = h.nrows();
        if h.ncols() != p {
            return Err(Error::InvalidArgument(format!(
                "cholesky needs a square matrix, got {}x{}",
                p,
                h.ncols()
            )));
        }
        let mut l = Array2::<f64>::zeros((p, p));
        for i in 0..p {
            for j in 0..=i {
                let mut sum = h[[i, j]];
                for k in 0..j {
                    sum -= l[[i, k]] * l[[j, k]];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return Err(Error::NotPositiveDefinite { pivot: i });
                    }
                    l[[i, i]] = sum.sqrt();
                } else {
                    l[[i, j]] = sum / l[[j, j]];
                }
            }
        }
        Ok(Cholesky { lower: l })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    /// Solves `H d = g` by forward then backward substitution.
    pub fn solve(&self, g: ArrayView1<f64>) -> Array1<f64> {
        let p = self.dim();
        assert_eq!(g.len(), p, "rhs length does not match factor");
        let l = &self.lower;
        let mut y = Array1::<f64>::zeros(p);
        for i in 0..p {
            let mut s = g[i];
            for k in 0..i {
                s -= l[[i, k]] * y[k];
            }
            y[i] = s / l[[i, i]];
        }
        let mut x = Array1::<f64>::zeros(p);
        for i in (0..p).rev() {
            let mut s = y[i];
            for k in (i + 1)..p {
                s -= l[[k, i]] * x[k];
            }
            x[i] = s / l[[i, i]];
        }
        x
    }
}

/// Solves `H d = g` for symmetric positive-definite `H` without forming an inverse.
pub fn spd_solve(h: &Array2<f64>, g: ArrayView1<f64>) -> Result<Array1<f64>> {
    if g.len() != h.nrows() {
        return Err(Error::InvalidArgument(format!(
            "rhs has length {} but matrix is {}x{}",
            g.len(),
            h.nrows(),
            h.ncols()
        )));
    }
    Ok(Cholesky::factor(h)?.solve(g))
}

#[inline]
pub fn dot(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        s += x * y;
    }
    s
}

#[inline]
pub fn norm(a: ArrayView1<f64>) -> f64 {
    dot(a, a).sqrt()
}

pub fn all_finite(a: ArrayView1<f64>) -> bool {
    a.iter().all(|v| v.is_finite())
}
