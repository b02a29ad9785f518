use thiserror::Error;

/// Errors raised by the workbench.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A brute-force computation would exceed a configured cap.
    #[error("resource limit `{cap_name}` exceeded: need {needed}, cap is {cap}")]
    ResourceLimit {
        cap_name: &'static str,
        needed: String,
        cap: u64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("monomial of degree {degree} exceeds degree budget {budget}")]
    DegreeBudget { degree: usize, budget: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate normalization: pseudo-moment of the constant monomial is zero")]
    DegenerateNormalization,

    #[error("numeric overflow: {0}")]
    NumericOverflow(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),

    /// A hard invariant checked by a run did not hold.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn limit(cap_name: &'static str, needed: impl ToString, cap: u64) -> Self {
        Error::ResourceLimit {
            cap_name,
            needed: needed.to_string(),
            cap,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
