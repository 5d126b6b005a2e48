use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("atomic level {0} is out of range (expected 1, 2 or 3)")]
    LevelOutOfRange(usize),

    #[error("transition {0} has no bare polar decomposition")]
    UnsupportedTransition(&'static str),

    #[error("unknown transition `{0}` (expected 13, 23 or 12)")]
    UnknownTransition(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("subspace ({n_a}, {n_b}) has no valid basis members")]
    EmptySubspace { n_a: u32, n_b: u32 },

    #[error("subspace ({n_a}, {n_b}) is not three-dimensional")]
    DegenerateSubspace { n_a: u32, n_b: u32 },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("eigendecomposition failed to converge")]
    EigenFailure,

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("full-space dimension {0} exceeds the oracle limit")]
    OracleTooLarge(usize),

    #[error("row at tau = {tau}: {reason}")]
    RowInvariant { tau: f64, reason: String },

    #[error("unknown preset `{0}` (expected fig2, fig3a, fig3b or fig4)")]
    UnknownPreset(String),

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),

    #[error("config: {0}")]
    Config(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
