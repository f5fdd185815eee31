//! Config-driven experiments on top of `degenlab-core`.
//!
//! - [`expr`]: closed-form expressions for coefficients, data and sources.
//! - [`config`]: the JSON experiment description and its validation.
//! - [`checkpoint`]: lossless binary and CSV storage of solved fields.
//! - [`report`]: CSV tables and the summary document.
//! - [`run`]: the `solve`, `analyze` and `report` pipelines.
//! - [`verify`]: property suites driven by a config and seed.

pub mod checkpoint;
pub mod config;
pub mod expr;
pub mod report;
pub mod run;
pub mod verify;

use std::path::PathBuf;

pub use config::ExperimentConfig;
pub use expr::Expr;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Expr(#[from] expr::ParseError),

    #[error(transparent)]
    Core(#[from] degenlab_core::Error),

    #[error("solver failed at eps = {epsilon}, step {step}: {source}")]
    Solve {
        epsilon: f64,
        step: usize,
        source: degenlab_core::Error,
    },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("thread pool: {0}")]
    Pool(String),
}

impl LabError {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        LabError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        LabError::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
