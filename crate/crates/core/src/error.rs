use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("solver did not converge within {iterations} iterations (residual {residual:.3e})")]
    IterationLimit { iterations: usize, residual: f64 },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("vector is degenerate in the B inner product (x'Bx <= 0)")]
    DegenerateVector,

    #[error("augmented basis is degenerate: correction vector lies in the coarse space")]
    DegenerateAugmentation,

    #[error("spaces are not nested: {0}")]
    NestingViolation(String),

    #[error("unsupported refinement ladder: {0}")]
    UnsupportedLadder(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
