use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A challenge/weight dot product came out exactly zero in machine
    /// arithmetic. The event has probability zero under a continuous weight
    /// model; callers are expected to resample the whole weight vector.
    #[error("challenge/weight dot product is exactly zero; resample the weight vector")]
    ZeroDotProduct,

    #[error("dimension n={n} outside the supported range 1..={max}")]
    UnsupportedN { n: usize, max: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("class map is empty")]
    EmptyMap,

    /// The collision-entropy estimator needs per-batch Poisson sample counts.
    #[error("class map was not produced by a Poissonized run")]
    NonPoissonizedInput,

    #[error("estimate undefined: {0}")]
    UndefinedEstimate(String),

    #[error("incompatible class maps: {0}")]
    IncompatibleMaps(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("unsupported file version: {0:?}")]
    Version(String),

    #[error("integrity violation: {0}")]
    Integrity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
