use thiserror::Error;

/// Errors produced by the section-volume machinery.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter falls outside its mathematical domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A requested computation lies outside the regime where the formulas
    /// in use are valid (e.g. limit constants for p > 2 with codimension
    /// two or more, where no closed form is available).
    #[error("unsupported regime: {0}")]
    Regime(String),

    /// Adaptive quadrature or a table build did not reach the requested
    /// accuracy.
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    /// An enumeration would exceed its size guard.
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    /// The weighted Gram matrix lost positive definiteness during
    /// factorization, which only happens for degenerate bases.
    #[error("weighted Gram matrix is not positive definite")]
    NotPositiveDefinite,
}

pub type Result<T> = std::result::Result<T, Error>;
