use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("uniform draw {0} is outside the open unit interval")]
    UniformOutOfRange(f64),

    #[error("quadrature did not reach tolerance {rtol:e} (estimated error {err:e}) within depth {depth}")]
    TolNotMet { rtol: f64, err: f64, depth: usize },

    #[error("filter construction failed for order {order}: {reason}")]
    Factorization { order: usize, reason: String },

    #[error("fewer than {needed} usable octaves (got {got})")]
    InsufficientScales { needed: usize, got: usize },

    #[error("index set D_j is empty at level {0}")]
    EmptyIndexSet(i64),

    #[error("hurst value {h} leaves the admissible range ({lo}, {hi})")]
    HurstRange { h: f64, lo: f64, hi: f64 },

    #[error("kernel table does not cover v = {0}")]
    TableRange(f64),

    #[error("malformed kernel table: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        LabError::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
