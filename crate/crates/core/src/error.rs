use std::path::PathBuf;

/// Errors produced by loaders, solvers and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("matrix is not positive definite (failed at pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error(
        "invalid initialization: gradient norm {grad_norm:e} at n = {n} exceeds certificate threshold {threshold:e}"
    )]
    InvalidInitialization {
        n: usize,
        grad_norm: f64,
        threshold: f64,
    },

    #[error("sample-size growth from m = {m} stalled: no certificate at n = {n} after fallback Newton steps (gradient norm {grad_norm:e})")]
    GrowthStalled { m: usize, n: usize, grad_norm: f64 },

    #[error("line search exhausted {halvings} halvings")]
    LineSearchFailed { halvings: usize },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
