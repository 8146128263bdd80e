use thiserror::Error;

/// Errors reported by turbo-weave operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by the zero polynomial")]
    ZeroDivisor,

    #[error("polynomial {0} is not primitive")]
    NotPrimitive(String),

    #[error("invalid polynomial `{input}`: {reason}")]
    PolyParse { input: String, reason: String },

    #[error("weight classes cover w <= {have}, but weight {need} was requested")]
    ClassesTooSmall { have: usize, need: usize },

    #[error("degree {0} is outside the supported range for this operation")]
    DegreeUnsupported(usize),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("interleaver file: {0}")]
    InterleaverFormat(String),

    #[error("no S-random permutation found for n={n}, s={s} after {restarts} restarts (longest prefix {best_prefix})")]
    SpreadNotReached {
        n: usize,
        s: usize,
        restarts: usize,
        best_prefix: usize,
    },

    #[error("deterministic interleaver precondition failed for n={n}, alpha={alpha}: {reason}")]
    AffinePrecondition {
        n: usize,
        alpha: usize,
        reason: String,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
