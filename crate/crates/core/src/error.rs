//! Error type shared by every module.
//!
//! Variants split into two families so callers (the CLI in particular) can
//! map them to exit statuses: input/domain problems and numeric failures.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside the model's admissible set.
    #[error("invalid parameter `{field}`: {reason}")]
    Parameter { field: &'static str, reason: String },

    /// An argument is outside the domain where a formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The residual has no sign change on the operating range.
    #[error("no equilibrium in the operating range ({0})")]
    NoEquilibrium(String),

    /// Structurally inconsistent configuration (e.g. dt not dividing tau).
    #[error("configuration error: {0}")]
    Config(String),

    /// An iteration did not reach its tolerance.
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    /// Any other floating-point failure (non-finite intermediate, etc.).
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl Error {
    pub fn parameter(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter { field, reason: reason.into() }
    }

    /// True for failures caused by the inputs rather than the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parameter { .. } | Error::Domain(_) | Error::NoEquilibrium(_) | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Reject non-finite or non-positive values with a field name attached.
pub(crate) fn require_positive(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::parameter(field, format!("must be finite and > 0, got {value}")))
    }
}
