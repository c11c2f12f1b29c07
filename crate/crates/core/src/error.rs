//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector/matrix sizes disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Cholesky hit a non-positive pivot at the given leading minor (1-based).
    #[error("matrix is not positive definite (leading minor {minor} has pivot {pivot:e})")]
    NotPositiveDefinite { minor: usize, pivot: f64 },

    /// Covariance estimated from data failed the positive-definiteness check.
    #[error(
        "estimated covariance is not positive definite (leading minor {minor}); \
         the data is degenerate, consider an explicit ridge repair"
    )]
    DegenerateCovariance { minor: usize },

    #[error("matrix is not symmetric: |m[{i}][{j}] - m[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error(
        "quadrature did not converge: estimate {estimate:e}, error estimate {error:e} \
         after {subdivisions} subdivisions"
    )]
    Quadrature {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    /// Hypergeometric series exhausted its iteration budget.
    #[error("series did not converge after {terms} terms: partial sum {partial_sum:e}, last term {last_term:e}")]
    Series {
        terms: usize,
        partial_sum: f64,
        last_term: f64,
    },

    /// The tail probability never fell below the target while expanding the bracket.
    #[error("distribution tail too heavy: G({upper:e}) = {value:e} still above target {target:e}")]
    DistributionTail { upper: f64, value: f64, target: f64 },

    /// Generic root-finding failure, with the brackets visited.
    #[error("root finder failed: {reason} (bracket trace: {trace:?})")]
    Solver { reason: String, trace: Vec<(f64, f64)> },

    #[error("expected shortfall is infinite: {0}")]
    InfiniteExpectedShortfall(String),

    /// Density generator does not integrate to one.
    #[error("density generator '{name}' is not normalized: total mass {mass}")]
    NotNormalized { name: String, mass: f64 },

    #[error("portfolio has no nonzero exposure")]
    ZeroPortfolio,

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Malformed input file or configuration.
    #[error("malformed input: {0}")]
    Input(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Stable snake_case tag, used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::DegenerateCovariance { .. } => "degenerate_covariance",
            Error::NotSymmetric { .. } => "not_symmetric",
            Error::Quadrature { .. } => "quadrature",
            Error::Series { .. } => "series",
            Error::DistributionTail { .. } => "distribution_tail",
            Error::Solver { .. } => "solver",
            Error::InfiniteExpectedShortfall(_) => "infinite_expected_shortfall",
            Error::NotNormalized { .. } => "not_normalized",
            Error::ZeroPortfolio => "zero_portfolio",
            Error::Unsupported(_) => "unsupported",
            Error::Input(_) => "input",
            Error::Numerical(_) => "numerical",
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
