use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::adanewton::AdaNewtonConfig;
use crate::baselines::{LineSearchConfig, SagaConfig, SgdConfig};
use crate::error::{Error, Result};
use crate::model::{
    load_csv, load_libsvm, synth_logistic, AccuracyPolicy, Dataset, LossModel, PolicyKind, RiskConfig,
};

/// Environment variable that overrides `out_dir`.
pub const OUT_DIR_ENV: &str = "ADANEWTON_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSourceKind {
    Synthetic,
    Libsvm,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clock {
    Wall,
    /// Report zero elapsed time so outputs are byte-reproducible.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    AdaNewton,
    Newton,
    Saga,
    Sgd,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::AdaNewton => "ada_newton",
            SolverKind::Newton => "newton",
            SolverKind::Saga => "saga",
            SolverKind::Sgd => "sgd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ada_newton" => Ok(SolverKind::AdaNewton),
            "newton" => Ok(SolverKind::Newton),
            "saga" => Ok(SolverKind::Saga),
            "sgd" => Ok(SolverKind::Sgd),
            other => Err(Error::Config(format!(
                "unknown solver '{other}' (expected ada_newton, newton, saga or sgd)"
            ))),
        }
    }
}

/// One experiment, read from a flat TOML file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: DataSourceKind,
    pub path: Option<PathBuf>,
    pub n: usize,
    pub p: usize,
    pub separation: f64,
    pub normalize: bool,

    pub loss: LossModel,
    pub c: f64,
    pub policy: PolicyKind,
    pub policy_scale: f64,

    pub solvers: Vec<String>,
    pub budget_passes: f64,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub clock: Clock,
    pub parallel: bool,
    pub audit: bool,

    pub alpha0: f64,
    pub beta: f64,
    pub m0: usize,
    pub warmup_steps: usize,
    pub warmup_stepsize: f64,
    pub max_backtracks: usize,

    pub armijo_alpha: f64,
    pub shrink_beta: f64,
    pub max_halvings: usize,
    pub newton_tol: f64,

    pub sgd_stepsize: f64,
    pub sgd_batch: usize,

    pub saga_stepsize: f64,
    pub saga_auto_scale: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let ada = AdaNewtonConfig::default();
        let ls = LineSearchConfig::default();
        ExperimentConfig {
            source: DataSourceKind::Synthetic,
            path: None,
            n: 10_000,
            p: 20,
            separation: 0.2,
            normalize: true,
            loss: LossModel::Logistic,
            c: 200.0,
            policy: PolicyKind::InverseN,
            policy_scale: 1.0,
            solvers: ["ada_newton", "newton", "saga", "sgd"].map(String::from).to_vec(),
            budget_passes: 25.0,
            out_dir: PathBuf::from("out"),
            seed: 0,
            clock: Clock::Wall,
            parallel: false,
            audit: false,
            alpha0: ada.alpha0,
            beta: ada.beta,
            m0: ada.m0,
            warmup_steps: ada.warmup_steps,
            warmup_stepsize: ada.warmup_stepsize,
            max_backtracks: ada.max_backtracks,
            armijo_alpha: ls.armijo_alpha,
            shrink_beta: ls.shrink_beta,
            max_halvings: ls.max_halvings,
            newton_tol: 1e-10,
            sgd_stepsize: 2e-2,
            sgd_batch: 1,
            saga_stepsize: 0.2,
            saga_auto_scale: false,
        }
    }
}

/// Parses the right-hand side of a `key=value` override as a TOML value,
/// falling back to a bare string.
fn override_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for (k, v) in overrides {
            table.insert(k.clone(), override_value(v));
        }
        let cfg: ExperimentConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; `overrides` win over file values and the output
    /// directory environment variable wins over the file but not over an
    /// explicit `out_dir` override.
    pub fn load(path: impl AsRef<Path>, overrides: &[(String, String)]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut all = Vec::new();
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                all.push(("out_dir".to_string(), toml::Value::String(dir).to_string()));
            }
        }
        all.extend_from_slice(overrides);
        Self::from_toml_str(&text, &all)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.solvers.is_empty() {
            return bad("at least one solver is required".into());
        }
        for s in &self.solvers {
            SolverKind::parse(s)?;
        }
        if self.budget_passes <= 0.0 || !self.budget_passes.is_finite() {
            return bad(format!("budget_passes must be positive, got {}", self.budget_passes));
        }
        match self.source {
            DataSourceKind::Synthetic => {
                if self.n == 0 || self.p == 0 {
                    return bad("synthetic data needs n >= 1 and p >= 1".into());
                }
            }
            DataSourceKind::Libsvm | DataSourceKind::Csv => {
                if self.path.is_none() {
                    return bad("file data sources need 'path'".into());
                }
            }
        }
        if self.newton_tol.is_nan() || self.newton_tol <= 0.0 {
            return bad(format!("newton_tol must be positive, got {}", self.newton_tol));
        }
        self.risk().map_err(|e| Error::Config(e.to_string()))?;
        self.line_search().validate().map_err(|e| Error::Config(e.to_string()))?;
        self.sgd(0).validate().map_err(|e| Error::Config(e.to_string()))?;
        self.saga(0).validate().map_err(|e| Error::Config(e.to_string()))?;
        let ada = self.ada(None);
        ada.validate(usize::MAX).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn solver_kinds(&self) -> Vec<SolverKind> {
        self.solvers
            .iter()
            .map(|s| SolverKind::parse(s).expect("validated"))
            .collect()
    }

    pub fn risk(&self) -> Result<RiskConfig> {
        let policy = AccuracyPolicy::new(self.policy, self.policy_scale)?;
        RiskConfig::new(self.c, policy, 1.0, self.loss)
    }

    pub fn ada(&self, max_grad_units: Option<u64>) -> AdaNewtonConfig {
        AdaNewtonConfig {
            alpha0: self.alpha0,
            beta: self.beta,
            m0: self.m0,
            warmup_steps: self.warmup_steps,
            warmup_stepsize: self.warmup_stepsize,
            max_backtracks: self.max_backtracks,
            max_grad_units,
        }
    }

    pub fn line_search(&self) -> LineSearchConfig {
        LineSearchConfig {
            armijo_alpha: self.armijo_alpha,
            shrink_beta: self.shrink_beta,
            max_halvings: self.max_halvings,
        }
    }

    pub fn sgd(&self, seed: u64) -> SgdConfig {
        SgdConfig {
            stepsize: self.sgd_stepsize,
            batch: self.sgd_batch,
            seed,
        }
    }

    pub fn saga(&self, seed: u64) -> SagaConfig {
        SagaConfig {
            stepsize: self.saga_stepsize,
            seed,
            auto_scale: self.saga_auto_scale,
        }
    }

    /// Loads or generates the dataset, shuffled by `seed`, then optionally
    /// normalized.
    pub fn dataset(&self) -> Result<Dataset> {
        let mut data = match self.source {
            DataSourceKind::Synthetic => synth_logistic(self.n, self.p, self.seed, self.separation)?.shuffled(self.seed),
            DataSourceKind::Libsvm => load_libsvm(self.path.as_ref().expect("validated"), self.seed)?,
            DataSourceKind::Csv => load_csv(self.path.as_ref().expect("validated"), self.seed)?,
        };
        if self.normalize {
            data.normalize_max_abs();
        }
        Ok(data)
    }
}
