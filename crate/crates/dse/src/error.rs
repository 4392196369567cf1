use thiserror::Error;

/// Errors raised across space enumeration, front extraction, and the runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("design space has an empty choice list: {0}")]
    EmptySpace(&'static str),

    #[error("choice {value} is not a legal {what}")]
    IllegalChoice { what: &'static str, value: u32 },

    #[error("point set is empty")]
    NoPoints,

    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },

    #[error("quantized network misses tolerance at every precision: {0}")]
    VerificationFailed(String),

    #[error(transparent)]
    Sim(#[from] flexsim::Error),

    #[error(transparent)]
    Cost(#[from] costmodel::Error),

    #[error(transparent)]
    Quant(#[from] quantnet::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
