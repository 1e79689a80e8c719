//! Error taxonomy shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("invalid censoring scheme: {0}")]
    InvalidScheme(String),
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("singular fit: {0}")]
    SingularFit(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("approximation failure: {0}")]
    ApproxFailure(String),
    #[error("importance proposal invalid: {0}")]
    ProposalInvalid(String),
    #[error("importance proposal mismatch: {0}")]
    ProposalMismatch(String),
    #[error("unreliable interval: {0}")]
    UnreliableInterval(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for input-shaped failures (bad files, schemes, configs); false for
    /// numeric/model failures. Drives the CLI exit-code split.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParam(_)
                | Error::InvalidScheme(_)
                | Error::InvalidSample(_)
                | Error::Parse(_)
                | Error::Io(_)
                | Error::InvalidConfig(_)
                | Error::DegenerateSample(_)
        )
    }
}
