use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlapError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid has no interior nodes")]
    EmptyGrid,

    #[error("field contains non-finite values")]
    InvalidField,

    #[error("Rayleigh quotient of the zero field is undefined")]
    ZeroField,

    #[error("whip segment {segment} could not be calibrated below {threshold:.6} up to length {max_length}: best eigenvalue {best:.6}")]
    SegmentCalibrationFailed { segment: usize, threshold: f64, max_length: f64, best: f64 },

    #[error("lambda = {lambda} is not below the threshold at infinity {threshold}")]
    GapViolation { lambda: f64, threshold: f64 },

    #[error("only {bins} radial bins above the floor, need at least 4")]
    InsufficientDecayData { bins: usize },

    #[error("subdomains {first} and {second} share interior nodes")]
    DisjointnessViolation { first: usize, second: usize },

    #[error("eigen iteration failed: {0}")]
    EigenIterationFailed(String),
}

pub type Result<T> = std::result::Result<T, PlapError>;

pub(crate) fn invalid(msg: impl Into<String>) -> PlapError {
    PlapError::InvalidInput(msg.into())
}
