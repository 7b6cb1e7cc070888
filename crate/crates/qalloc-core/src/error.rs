//! Error type shared by every module in the crate.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while allocating, partitioning, or running
/// experiments.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's preconditions.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Total demand exceeds total capacity.
    #[error("infeasible: total demand {demand} exceeds total capacity {capacity} (shortfall {shortfall})")]
    Infeasible {
        demand: f64,
        capacity: f64,
        shortfall: f64,
    },

    /// An exhaustive enumeration would exceed its size guard.
    #[error("enumeration too large: {count} candidates exceed the limit of {limit}")]
    EnumerationTooLarge { count: u128, limit: u128 },

    /// A text input (circuit file, config file) failed to parse.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A structurally valid input carries inconsistent values.
    #[error("config error: {0}")]
    Config(String),

    /// File I/O failure, with the offending path attached.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn infeasible(demand: f64, capacity: f64) -> Self {
        Error::Infeasible {
            demand,
            capacity,
            shortfall: demand - capacity,
        }
    }
}
