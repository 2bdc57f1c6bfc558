use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tensor budget exceeded: order {order} in dimension {dim} (max level {max_level}, max {max_coefficients} coefficients)")]
    Budget {
        order: usize,
        dim: usize,
        max_level: usize,
        max_coefficients: usize,
    },

    #[error("order mismatch: expected {expected}, got {got}")]
    OrderMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {point} lies outside the function domain [{lower}, {upper}]")]
    Domain {
        point: String,
        lower: String,
        upper: String,
    },

    #[error("derivative order {order} exceeds the available maximum {max_order}")]
    DerivativeOrder { order: usize, max_order: usize },

    #[error("p-variation exponent must be >= 1, got {0}")]
    Exponent(f64),

    #[error("grid index {index} out of range (grid has {len} points)")]
    Index { index: usize, len: usize },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid function spec `{spec}`: {reason}")]
    FunctionSpec { spec: String, reason: String },

    #[error("invalid polynomial: {0}")]
    Polynomial(String),

    #[error("generator failure: {0}")]
    Generator(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
