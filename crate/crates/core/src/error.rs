use thiserror::Error;

/// Errors raised by measure construction, solvers and bound evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty table")]
    Empty,

    #[error("non-contiguous or degenerate support: {0}")]
    Support(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("index {index} outside {range}")]
    OutOfRange { index: usize, range: String },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("not a probability vector: {0}")]
    NotNormalized(String),

    #[error("test function value {value} at {index} outside [0, 1]")]
    TestFunctionRange { index: usize, value: f64 },

    #[error("f must be in the vanishing class: f({index}) = {value} above the support")]
    NotVanishing { index: usize, value: f64 },

    #[error("divergent series: {0}")]
    Divergent(String),

    #[error("pmf underflow at k = {0}; choose a smaller truncation bound")]
    Underflow(usize),

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("inconsistent coupling: {0}")]
    InconsistentCoupling(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        reason: reason.into(),
    }
}
