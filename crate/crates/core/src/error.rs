use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its valid domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown file id {id} (catalog has {n_files} files)")]
    UnknownFile { id: usize, n_files: usize },

    #[error("chunk index {j} out of range 1..={max} for file {file}")]
    ChunkIndexOutOfRange { file: usize, j: u32, max: u32 },

    /// The cache can hold every chunk of the catalog, so no characteristic time exists.
    #[error("capacity {capacity} must be below total catalog chunks {total}")]
    CapacityTooLarge { capacity: u64, total: u64 },

    #[error("root finder did not reach tolerance {tol:e} (best residual {residual:e})")]
    NoConvergence { tol: f64, residual: f64 },

    #[error("state space exceeds {limit} states")]
    StateSpaceOverflow { limit: usize },

    /// A structural invariant failed at runtime.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
