use thiserror::Error;

/// Errors raised by the toolkit. Verification failures are never errors;
/// they are recorded as failing checks inside a [`crate::report::Report`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CptError {
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("closure error: image of label {0} is not in the space")]
    Closure(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate demonstration: {0}")]
    DegenerateDemo(String),

    #[error("lookup error: {0}")]
    Lookup(String),

    #[error("inadmissible phase convention: {0}")]
    Admissibility(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = CptError> = std::result::Result<T, E>;
