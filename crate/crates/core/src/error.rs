use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid single-site distribution: {0}")]
    InvalidSsd(String),

    #[error("cube with {sites} sites exceeds the site budget of {budget}")]
    SiteBudget { sites: u128, budget: usize },

    #[error("walk expansion with {states} states exceeds the budget of {budget}")]
    WalkBudget { states: u128, budget: u128 },

    #[error("enumeration over {sites} sites exceeds the limit of {limit}")]
    EnumerationBudget { sites: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("site {0:?} is outside the cube")]
    SiteOutsideCube(Vec<i32>),

    #[error("eigensolver did not converge ({context})")]
    NoConvergence { context: String },

    #[error("replicate {replicate}: {source}")]
    Replicate {
        replicate: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Refused(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Tags an error with the replicate it came from.
    pub fn in_replicate(self, replicate: u64) -> Self {
        Error::Replicate {
            replicate,
            source: Box::new(self),
        }
    }
}
