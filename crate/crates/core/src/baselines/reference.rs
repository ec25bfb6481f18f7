use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use ndarray::Array1;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::newton::{newton_linesearch, LineSearchConfig};
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::model::{Dataset, RiskConfig};
use crate::risk::{risk_gradient, risk_value, WorkCounter};
use crate::trace::NullSink;

const REFERENCE_TOL: f64 = 1e-12;

/// Minimizer of `R_n` and its value.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub w: Array1<f64>,
    pub value: f64,
    /// `||grad R_n(w)||` at the returned point.
    pub grad_norm: f64,
}

/// Newton with line search from the origin to gradient norm `1e-12`, or to the
/// floating-point floor if that comes first.
pub fn reference_optimum(data: &Dataset, cfg: &RiskConfig, n: usize) -> Result<Reference> {
    reference_optimum_with_tol(data, cfg, n, REFERENCE_TOL)
}

pub(crate) fn reference_optimum_with_tol(data: &Dataset, cfg: &RiskConfig, n: usize, tol: f64) -> Result<Reference> {
    let w0 = Array1::<f64>::zeros(data.dim());
    let run = newton_linesearch(data, cfg, n, w0.view(), &LineSearchConfig::default(), tol, None, &mut NullSink)?;
    let value = risk_value(data, cfg, n, run.w.view())?;
    let g = risk_gradient(data, cfg, n, run.w.view(), &mut WorkCounter::default())?;
    Ok(Reference {
        grad_norm: norm(g.view()),
        value,
        w: run.w,
    })
}

#[derive(Serialize, Deserialize)]
struct Stored {
    key: String,
    value_bits: u64,
    grad_norm_bits: u64,
    w_bits: Vec<u64>,
}

/// Reference optima keyed by dataset content, risk parameters and sample
/// size, optionally persisted as JSON files in a directory.
#[derive(Debug, Default)]
pub struct ReferenceCache {
    dir: Option<PathBuf>,
    entries: HashMap<String, Reference>,
}

impl ReferenceCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        ReferenceCache {
            dir: Some(dir.into()),
            entries: HashMap::new(),
        }
    }

    pub fn key(data: &Dataset, cfg: &RiskConfig, n: usize) -> String {
        format!(
            "{}-{:?}-{:016x}-{:?}-{:016x}-{n}",
            data.content_hash(),
            cfg.loss,
            cfg.c.to_bits(),
            cfg.policy.kind,
            cfg.policy.scale.to_bits()
        )
    }

    fn file_for(&self, key: &str) -> Option<PathBuf> {
        let digest = Sha256::digest(key.as_bytes());
        let name: String = digest.iter().take(12).map(|b| format!("{b:02x}")).collect();
        self.dir.as_ref().map(|d| d.join(format!("reference_{name}.json")))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&mut self, data: &Dataset, cfg: &RiskConfig, n: usize) -> Result<Reference> {
        let key = Self::key(data, cfg, n);
        if let Some(r) = self.entries.get(&key) {
            return Ok(r.clone());
        }
        let file = self.file_for(&key);
        if let Some(r) = file.as_ref().and_then(|f| load(f, &key, data.dim())) {
            self.entries.insert(key, r.clone());
            return Ok(r);
        }
        let r = reference_optimum(data, cfg, n)?;
        if let Some(f) = file {
            store(&f, &key, &r)?;
        }
        self.entries.insert(key, r.clone());
        Ok(r)
    }
}

fn load(path: &PathBuf, key: &str, dim: usize) -> Option<Reference> {
    let text = fs::read_to_string(path).ok()?;
    let s: Stored = serde_json::from_str(&text).ok()?;
    if s.key != key || s.w_bits.len() != dim {
        return None;
    }
    Some(Reference {
        w: s.w_bits.into_iter().map(f64::from_bits).collect(),
        value: f64::from_bits(s.value_bits),
        grad_norm: f64::from_bits(s.grad_norm_bits),
    })
}

fn store(path: &PathBuf, key: &str, r: &Reference) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let s = Stored {
        key: key.to_string(),
        value_bits: r.value.to_bits(),
        grad_norm_bits: r.grad_norm.to_bits(),
        w_bits: r.w.iter().map(|v| v.to_bits()).collect(),
    };
    let text = serde_json::to_string(&s).map_err(|e| Error::Config(format!("reference cache: {e}")))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
