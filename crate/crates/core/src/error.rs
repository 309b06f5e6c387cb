use alloc::string::String;
use core::fmt;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A size parameter (qubit count, vertex count, ...) is outside its domain.
    InvalidSize { what: &'static str, value: usize },
    IndexOutOfRange { index: usize, len: usize },
    /// An operation was called on a state that does not meet its precondition.
    Precondition(String),
    /// Non-finite values or a failed decomposition.
    Numerical(String),
    /// The state has zero norm and cannot be renormalized.
    DegenerateState,
    Config(String),
    Validation(String),
    Parameter(String),
    /// Sharpe ratio of a portfolio with zero risk.
    UndefinedRatio,
    TooLarge { n: usize, max: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSize { what, value } => write!(f, "invalid {what}: {value}"),
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            Error::DegenerateState => f.write_str("state has zero norm"),
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Validation(msg) => write!(f, "validation failed: {msg}"),
            Error::Parameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::UndefinedRatio => f.write_str("ratio undefined for zero-risk portfolio"),
            Error::TooLarge { n, max } => write!(f, "problem size {n} exceeds limit {max}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T, E = Error> = core::result::Result<T, E>;
