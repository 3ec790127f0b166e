use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Mismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exponential requires a zero empty-word coefficient, found {0}")]
    NonzeroConstant(f64),

    #[error("logarithm requires an empty-word coefficient of 1, found {0}")]
    NonUnitConstant(f64),

    #[error("path needs at least 2 samples, got {0}")]
    PathTooShort(usize),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("channel {channel} has no surviving entries after corruption")]
    ChannelLost { channel: usize },

    #[error("circulant embedding has a negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("{}: line {line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: no samples", .0.display())]
    NoSamples(PathBuf),

    #[error("chunk of {chunk} steps is too long for a path with {steps} steps")]
    ChunkTooLong { chunk: usize, steps: usize },

    #[error("reservoir state diverged (|z| > 1e100) at step {step}; sigma_A = {sigma_a} is likely too large")]
    Overflow { step: usize, sigma_a: f64 },

    #[error("non-finite feature value in row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },

    #[error("training data contains a single class ({0})")]
    SingleClass(usize),

    #[error("monte carlo kernel estimates require the identity activation, got {0}")]
    NonIdentityActivation(String),

    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{} of {total} samples failed; first: {}", failures.len(), failures.first().map(|e| e.to_string()).unwrap_or_default())]
    Batch { total: usize, failures: Vec<Error> },

    #[error("config `{config}`: {source}")]
    Config {
        config: String,
        #[source]
        source: Box<Error>,
    },

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        Error::Mismatch(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn at_sample(self, index: usize) -> Self {
        Error::Sample {
            index,
            source: Box::new(self),
        }
    }
}
