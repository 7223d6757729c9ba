use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite entry in {what} at ({row}, {col})")]
    NonFiniteEntry { what: &'static str, row: usize, col: usize },

    #[error("non-finite value in {what} at index {index}")]
    NonFiniteValue { what: &'static str, index: usize },

    #[error("non-finite data at observation {index}")]
    NonFiniteObservation { index: usize },

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("design matrix has no nonzero column")]
    DegenerateDesign,

    #[error("gradient requested before any observation was absorbed")]
    NoObservations,

    #[error("direction has l1 norm {norm} outside the ball of radius {radius}")]
    OutsideBall { norm: f64, radius: f64 },

    #[error("iterate for radius {radius} left the l1 ball (norm {norm}) at step {step}")]
    InfeasibleIterate { radius: f64, norm: f64, step: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
