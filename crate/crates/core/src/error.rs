//! Error taxonomy shared by every module. The variants map onto the CLI's
//! exit codes: parameter/mode/fit problems are configuration errors, while
//! factorization and quadrature failures are numerical errors.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received a value outside its domain.
    #[error("invalid parameter `{field}`: {message}")]
    Parameter { field: &'static str, message: String },

    /// Cholesky factorization failed even after the jitter retry.
    #[error(
        "covariance matrix is not positive definite \
         (smallest pivot estimate {min_eigenvalue_estimate:e})"
    )]
    NotPositiveDefinite { min_eigenvalue_estimate: f64 },

    /// Operation called in the wrong integrand mode (convex vs signed).
    #[error("operation requires a {required} spec: {message}")]
    Mode { required: &'static str, message: String },

    /// A numerical routine failed to reach its target accuracy.
    #[error("numerical failure in {context}: {message}")]
    Numerical { context: &'static str, message: String },

    /// Log-log regression needs at least three points.
    #[error("rate fit needs at least 3 points, got {points}")]
    Fit { points: usize },

    /// Two representations of the same quantity disagreed beyond tolerance —
    /// this indicates a bug, not bad input.
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
