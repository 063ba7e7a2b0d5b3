use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("subspace is not listed in the finite order")]
    UnlistedSubspace,

    #[error("finite order classes overlap: {0}")]
    OverlappingClasses(String),

    #[error("continuity is undefined for finite order presentations")]
    TopologyUndefined,

    #[error(
        "solver indeterminate after {iterations} iterations \
         (best verified margin {lower:e}, certified upper bound {upper:e})"
    )]
    Indeterminate {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error("no path within {max_hops} hops: longitude gap {needed} exceeds reach {reach}")]
    HopBudgetExceeded {
        max_hops: usize,
        needed: f64,
        reach: f64,
    },
}

impl Error {
    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}
