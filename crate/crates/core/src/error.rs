use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "quadrature did not converge after {intervals} subintervals (error estimate {residual:e})"
    )]
    Quadrature { intervals: usize, residual: f64 },

    #[error("search space too large: {candidates} candidate allocations (limit {limit})")]
    SearchSpaceTooLarge { candidates: f64, limit: u64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
