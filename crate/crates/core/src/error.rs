use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("NaN energy difference passed to the Metropolis test")]
    NanEnergy,

    #[error("non-finite value at iteration {iteration}: {what}")]
    Numeric { iteration: u64, what: String },

    #[error("histograms have mismatched binning")]
    MismatchedBinning,

    #[error("found {found} mode(s) along coordinate {coordinate}, need two; specify sand centers manually")]
    InsufficientModes { coordinate: usize, found: usize },

    #[error("data set is empty")]
    EmptyData,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
