use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite integrand value {value} at node {index} (z = {node})")]
    NonFiniteNode {
        index: usize,
        node: Complex64,
        value: Complex64,
    },

    #[error("quadrature did not converge: last change {change:.3e} exceeds tolerance {tol:.3e}")]
    NoConvergence { change: f64, tol: f64 },

    #[error("truncated line integral has a non-negligible tail (endpoint ratio {ratio:.3e})")]
    TailTooLarge { ratio: f64 },

    #[error("contour separation violated: {0}")]
    ContourSeparation(String),

    #[error("numerical overflow: {0}")]
    Overflow(String),

    #[error("eigensolver did not converge within {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular or ill-conditioned matrix (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("partition function vanishes")]
    ZeroPartition,

    #[error("enumeration budget exceeded: {needed} configurations > {budget}")]
    Budget { needed: u128, budget: u128 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// True for failures of the numerical machinery itself (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteNode { .. }
                | Error::NoConvergence { .. }
                | Error::TailTooLarge { .. }
                | Error::ContourSeparation(_)
                | Error::Overflow(_)
                | Error::EigenNoConvergence { .. }
                | Error::IllConditioned { .. }
                | Error::ZeroPartition
        )
    }
}
