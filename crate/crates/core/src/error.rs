use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),

    #[error("integration did not converge: estimate {value:e}, error {error:e} after {evaluations} evaluations")]
    NotConverged {
        value: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("fixed-point iteration did not converge after {0} iterations")]
    FixedPoint(usize),

    #[error("sampling function rejected: {0}")]
    Sampling(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
