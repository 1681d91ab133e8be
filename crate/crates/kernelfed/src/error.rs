use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or arguments (dimension mismatches, bad
    /// hyperparameters, malformed files).
    #[error("configuration error: {0}")]
    Config(String),

    /// The non-iid partitioner failed to cover every cell within the
    /// retry budget.
    #[error("partition coverage not achieved within {retries} redraws (m={parties}, cells={cells})")]
    Coverage {
        retries: usize,
        parties: usize,
        cells: usize,
    },

    /// Input is degenerate for the requested operation (e.g. constant
    /// features with zero self-HSIC).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The dense recurrence oracle refuses instances above its size cap.
    #[error("oracle instance too large: {size} points exceeds cap of {cap}")]
    OracleTooLarge { size: usize, cap: usize },

    /// A linear solve failed in a way the fallbacks could not repair.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config, 3 coverage, 4 is reserved
    /// for oracle-check failures, everything else 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Degenerate(_) => 2,
            Error::Coverage { .. } => 3,
            _ => 1,
        }
    }
}
