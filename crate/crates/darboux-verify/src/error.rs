//! Errors of the verification harness. Everything here maps to exit
//! code 2 (usage or configuration); identity failures are reported
//! through the report's pass flags and exit code 1 instead.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at byte {offset}: expected {expected}")]
    Parse { offset: usize, expected: String },
    #[error("schema error at {path}: {detail}")]
    Schema { path: String, detail: String },
    #[error("unresolved name {0:?}")]
    Resolve(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error("numerical failure outside the chart-skip contract: {0}")]
    Numeric(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
