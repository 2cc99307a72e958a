use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the library. Optimizers never fail on bad fitness
/// values; those are rejected and counted instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate pattern: array factor is zero at every grid angle")]
    DegeneratePattern,

    #[error("grid too coarse: {samples} samples, need at least 3")]
    Resolution { samples: usize },

    #[error("item {index} of size {size} exceeds bin capacity {capacity}")]
    InfeasibleItem {
        index: usize,
        size: f64,
        capacity: f64,
    },

    #[error("exhaustive packing supports at most {limit} items, got {items}")]
    SizeLimit { items: usize, limit: usize },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
