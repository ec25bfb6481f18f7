use ndarray::{Array2, ArrayView1};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Dense design matrix with one label per row.
///
/// Row order is fixed once the dataset is built; the first `n` rows form the
/// sample set of size `n`, so smaller sample sets are always prefixes of
/// larger ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<f64>,
    shuffle_seed: u64,
}

impl Dataset {
    /// Builds a classification dataset; every label must be exactly -1 or +1.
    pub fn new(features: Array2<f64>, labels: Vec<f64>, shuffle_seed: u64) -> Result<Self> {
        if let Some((i, y)) = labels
            .iter()
            .enumerate()
            .find(|(_, y)| **y != 1.0 && **y != -1.0)
        {
            return Err(Error::InvalidArgument(format!(
                "label {y} at row {i} is not -1 or +1"
            )));
        }
        Self::with_targets(features, labels, shuffle_seed)
    }

    /// Builds a dataset with arbitrary finite targets. Only the quadratic
    /// loss gives these a meaning; logistic formulas assume ±1 labels.
    pub fn with_targets(features: Array2<f64>, targets: Vec<f64>, shuffle_seed: u64) -> Result<Self> {
        let (n, p) = features.dim();
        if n == 0 || p == 0 {
            return Err(Error::InvalidArgument(format!(
                "dataset must have at least one row and one column, got {n}x{p}"
            )));
        }
        if targets.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {n} rows",
                targets.len()
            )));
        }
        if !features.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("dataset features".into()));
        }
        if !targets.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("dataset labels".into()));
        }
        Ok(Dataset {
            features,
            labels: targets,
            shuffle_seed,
        })
    }

    /// Applies one seeded Fisher-Yates permutation to the rows.
    pub fn shuffled(self, seed: u64) -> Self {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        let p = self.dim();
        let mut features = Array2::<f64>::zeros((n, p));
        let mut labels = Vec::with_capacity(n);
        for (dst, &src) in order.iter().enumerate() {
            features.row_mut(dst).assign(&self.features.row(src));
            labels.push(self.labels[src]);
        }
        Dataset {
            features,
            labels,
            shuffle_seed: seed,
        }
    }

    /// Number of rows, N.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Feature dimension, p.
    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn shuffle_seed(&self) -> u64 {
        self.shuffle_seed
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    #[inline]
    pub fn row(&self, k: usize) -> ArrayView1<'_, f64> {
        self.features.row(k)
    }

    #[inline]
    pub fn label(&self, k: usize) -> f64 {
        self.labels[k]
    }

    /// Copy of the first `n` rows.
    pub fn prefix(&self, n: usize) -> Result<Dataset> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidArgument(format!(
                "prefix size {n} outside 1..={}",
                self.len()
            )));
        }
        Ok(Dataset {
            features: self.features.slice(ndarray::s![..n, ..]).to_owned(),
            labels: self.labels[..n].to_vec(),
            shuffle_seed: self.shuffle_seed,
        })
    }

    /// Divides every column by its largest absolute value. All-zero columns
    /// are left untouched.
    pub fn normalize_max_abs(&mut self) {
        for mut col in self.features.columns_mut() {
            let m = col.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if m > 0.0 {
                col.mapv_inplace(|v| v / m);
            }
        }
    }

    /// Hex SHA-256 over the exact bit patterns of shape, features and labels.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.len() as u64).to_le_bytes());
        h.update((self.dim() as u64).to_le_bytes());
        for v in self.features.iter() {
            h.update(v.to_bits().to_le_bytes());
        }
        for v in &self.labels {
            h.update(v.to_bits().to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
