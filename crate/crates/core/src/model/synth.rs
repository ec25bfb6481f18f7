use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::loss::sigmoid;
use super::Dataset;
use crate::error::{Error, Result};
use crate::linalg::dot;

/// Synthetic logistic-model dataset. See [`synth_logistic_with_truth`].
pub fn synth_logistic(n: usize, p: usize, seed: u64, separation: f64) -> Result<Dataset> {
    synth_logistic_with_truth(n, p, seed, separation).map(|(d, _)| d)
}

/// Draws `w_true = separation * z` with `z ~ N(0, I_p)`, rows `x ~ N(0, I_p)`
/// and labels `y = +1` with probability `sigmoid(<w_true, x>)`.
///
/// The model is well specified, so `w_true` minimizes the population
/// logistic loss. It is returned alongside the data.
pub fn synth_logistic_with_truth(
    n: usize,
    p: usize,
    seed: u64,
    separation: f64,
) -> Result<(Dataset, Array1<f64>)> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidArgument(format!(
            "synthetic data needs n >= 1 and p >= 1, got n={n}, p={p}"
        )));
    }
    if !separation.is_finite() || separation < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "separation must be finite and non-negative, got {separation}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = Array1::from_shape_fn(p, |_| separation * rng.sample::<f64, _>(StandardNormal));
    let mut x = Array2::<f64>::zeros((n, p));
    let mut y = Vec::with_capacity(n);
    for mut row in x.rows_mut() {
        for v in row.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let prob = sigmoid(dot(truth.view(), row.view()));
        let u: f64 = rng.random();
        y.push(if u < prob { 1.0 } else { -1.0 });
    }
    Ok((Dataset::new(x, y, seed)?, truth))
}
