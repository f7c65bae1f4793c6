use thiserror::Error;

use tarski_core::MonotonicityWitness;

use crate::supermodular::PropertyViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(tarski_core::Error),

    #[error("game property violated: {0}")]
    Violation(PropertyViolation),

    #[error("best-response map is not monotone: {0:?}")]
    NotMonotone(MonotonicityWitness),

    #[error("malformed instance: {0}")]
    MalformedInstance(String),

    #[error("inconsistent precision plan: {0}")]
    Precision(String),

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<PropertyViolation> for Error {
    fn from(v: PropertyViolation) -> Self {
        Error::Violation(v)
    }
}

/// Unwraps property violations that travelled through a core oracle as
/// evaluation errors.
impl From<tarski_core::Error> for Error {
    fn from(e: tarski_core::Error) -> Self {
        match e {
            tarski_core::Error::Evaluation(inner) => match inner.downcast::<PropertyViolation>() {
                Ok(v) => Error::Violation(*v),
                Err(other) => Error::Core(tarski_core::Error::Evaluation(other)),
            },
            other => Error::Core(other),
        }
    }
}
