use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = MrctError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MrctError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("degenerate subset: {0}")]
    DegenerateSubset(String),

    #[error("consistency factor iteration failed: {message} (history: {history:?})")]
    Convergence { message: String, history: Vec<f64> },

    #[error("curve {curve} has {observed} observations but {required} basis functions were requested")]
    UnderdeterminedCurve {
        curve: String,
        observed: usize,
        required: usize,
    },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl MrctError {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        MrctError::Dimension(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        MrctError::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        MrctError::Numerical(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        MrctError::Parse {
            line,
            message: msg.into(),
        }
    }
}
