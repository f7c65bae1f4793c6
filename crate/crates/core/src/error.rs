use thiserror::Error;

use crate::lattice::GridPoint;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected} coordinates, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("invalid grid shape: {0}")]
    InvalidShape(String),

    #[error("point {point} lies outside the box")]
    OutOfBox { point: GridPoint },

    /// The oracle answered with a point outside its own domain.
    #[error("malformed oracle: f({query}) = {answer} escapes the domain")]
    MalformedOracle { query: GridPoint, answer: GridPoint },

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("protocol violation: {0}")]
    Protocol(String),

    /// Something that cannot happen for correct code did happen.
    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("oracle evaluation failed: {0}")]
    Evaluation(Box<dyn std::error::Error + Send + Sync>),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
