use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("distribution does not sum to one (sum = {sum})")]
    NonStochastic { sum: f64 },
    #[error("negative or non-finite entry {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },
    #[error("channel entry P({y}|{x}) is zero; channels must be strictly positive")]
    ZeroChannelEntry { x: usize, y: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("distribution has empty support")]
    EmptySupport,
    #[error("codebook size {m} exceeds cap {cap}; lower the rate or the block length")]
    CodebookTooLarge { m: u64, cap: u64 },
    #[error("need at least 3 block lengths with nonzero counts, got {0}")]
    InsufficientData(usize),
    #[error("invalid model spec: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn mismatch(what: impl Into<String>) -> Error {
    Error::DimensionMismatch(what.into())
}
