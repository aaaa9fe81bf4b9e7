use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("rewrite rules only cover levels up to {cutoff}, needed {needed}")]
    CutoffExceeded { cutoff: u32, needed: u32 },
    #[error("normal form exceeded the step budget of {0} rewrites")]
    StepBudget(u64),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("parity error: {0}")]
    Parity(String),
    #[error("precision error: {0}")]
    Precision(String),
}

pub type Result<T> = std::result::Result<T, KernelError>;
