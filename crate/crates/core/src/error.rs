use thiserror::Error;

/// Errors shared by all estimation and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally invalid input (dimension mismatch, non-finite entries, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Exceedance count or order-statistic index out of range.
    #[error("threshold out of range: {0}")]
    BadThreshold(String),

    /// The estimated vector has (numerically) zero norm and no direction.
    #[error("degenerate direction: {0}")]
    DegenerateDirection(String),

    /// Soft thresholding removed every coordinate; the penalty is too large.
    #[error("over-shrunk: {0}")]
    OverShrunk(String),

    /// An order statistic required to be positive is not.
    #[error("non-positive tail value: {0}")]
    NonPositiveTail(String),

    /// Too few exceedances, or zero variance within the exceedance subsample.
    #[error("degenerate subsample: {0}")]
    DegenerateSubsample(String),
}

impl Error {
    /// Stable machine-readable error name, used by the CLI's stderr JSON.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Domain(_) => "Domain",
            Error::InvalidInput(_) => "InvalidInput",
            Error::BadThreshold(_) => "BadThreshold",
            Error::DegenerateDirection(_) => "DegenerateDirection",
            Error::OverShrunk(_) => "OverShrunk",
            Error::NonPositiveTail(_) => "NonPositiveTail",
            Error::DegenerateSubsample(_) => "DegenerateSubsample",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
