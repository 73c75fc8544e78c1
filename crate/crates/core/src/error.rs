use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("cannot parse `{text}` as an exact rational: {reason}")]
    Parse { text: String, reason: String },

    /// A floating-point literal was supplied where an exact value is required.
    #[error("`{0}` is a floating-point literal; pass it as p/q or a finite decimal, or allow inexact input")]
    Inexact(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid partition spec: {0}")]
    InvalidSpec(String),

    #[error("invalid member id: {0}")]
    InvalidMember(String),

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid coloring: {0}")]
    InvalidColoring(String),

    #[error("color {color} touches both faces of axis {axis}")]
    OppositeFaces { color: u32, axis: usize },

    /// A statement that is guaranteed to hold was found to fail. Always a bug.
    #[error("theorem violation: {0}")]
    TheoremViolation(String),

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("out of regime: {0}")]
    OutOfRegime(String),
}

pub type Result<T> = std::result::Result<T, Error>;
