use thiserror::Error;

/// Errors raised by the small-ball toolkit.
///
/// The variants are grouped so that a caller can tell a malformed request
/// (`Domain`, `Usage`, `Validation`) from a request that is well formed but
/// lies outside the regime a method can serve (`OutOfRegime`, `Truncation`,
/// `PrecisionLimit`, `UnboundedCount`).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("kernel matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below -{tolerance:e}")]
    NotPsd { eigenvalue: f64, tolerance: f64 },

    #[error("counting function unbounded: threshold {lambda:e} is below the representable tail floor {floor:e}")]
    UnboundedCount { lambda: f64, floor: f64 },

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("precision limit: {0}")]
    PrecisionLimit(String),

    #[error("out of regime: {0}")]
    OutOfRegime(String),
}

impl Error {
    /// True for errors that mean "valid request, but the method's regime is
    /// exhausted". Scripted sweeps use this to stop a grid without treating
    /// the stop as a bug.
    pub fn is_regime(&self) -> bool {
        matches!(
            self,
            Error::OutOfRegime(_)
                | Error::Truncation(_)
                | Error::PrecisionLimit(_)
                | Error::UnboundedCount { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}
