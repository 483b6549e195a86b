use thiserror::Error;

use crate::solver::PicardDiagnostics;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("field samples must be finite")]
    NonFinite,

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("smallness precondition violated: {0}")]
    Smallness(String),

    #[error("Picard iteration failed: {reason}")]
    Divergence {
        reason: String,
        diagnostics: Box<PicardDiagnostics>,
    },

    #[error("input is not a converged solution")]
    NotConverged,

    #[error("config {path}: {msg}")]
    Config { path: String, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed run file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Param(msg.into())
}
