use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid function spec: {0}")]
    InvalidSpec(String),

    #[error("dimension {n} exceeds the supported maximum {max} for this operation")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("oracle is not declared monotone; this operation is only sound for monotone functions")]
    NotMonotone,

    #[error("function is constant; the requested quantity is undefined")]
    ConstantFunction,

    #[error("iteration cap {cap} exceeded; estimates may have failed or k may be under-claimed")]
    IterationCapExceeded { cap: u64 },

    #[error("the supplied coordinate set is not a valid certificate for this input")]
    NotACertificate,

    #[error("enumeration budget exceeded: C({n},{k}) candidate sets is over the limit")]
    EnumerationBudget { n: usize, k: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
