use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("matrix is not Hermitian (max deviation {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("exponent matrix contains non-finite entries")]
    NonFinite,

    #[error("step rejected at t = {t:.6}: local error estimate {estimate:.3e} exceeds {limit:.1e}")]
    StepRejected { t: f64, estimate: f64, limit: f64 },

    #[error("state left the physical region: eigenvalue {min_eigenvalue:.3e} below {limit:.1e}")]
    Positivity { min_eigenvalue: f64, limit: f64 },

    #[error("efficiency undefined: |mean work| = {wbar:.3e} per period")]
    ZeroWork { wbar: f64 },

    #[error("input is not stationary (residual {residual:.3e})")]
    NotStationary { residual: f64 },

    #[error("config parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("config validation error for `{key}`: {reason}")]
    Validation { key: String, reason: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("every sweep point failed; first error: {first}")]
    AllPointsFailed { first: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { key: key.to_string(), reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } => 2,
            Error::Validation { .. } | Error::InvalidParameter { .. } | Error::UnknownPreset(_) => 3,
            Error::Io { .. } => 4,
            _ => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
