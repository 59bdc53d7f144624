use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration value is outside its admissible range.
    #[error("invalid parameter `{field}`: {reason}")]
    Parameter { field: &'static str, reason: String },

    /// The requested evaluation is not defined for these arguments.
    #[error("unsupported evaluation: {0}")]
    Unsupported(String),

    #[error(
        "quadrature did not converge in {subdivisions} subdivisions \
         (estimate {estimate:e}, error {error:e}, requested {tolerance:e})"
    )]
    Quadrature {
        subdivisions: usize,
        estimate: f64,
        error: f64,
        tolerance: f64,
    },
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for numerical (as opposed to configuration) failures.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Quadrature { .. })
    }
}
