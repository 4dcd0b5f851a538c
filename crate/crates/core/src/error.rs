use thiserror::Error;

/// Errors raised by net validation, evaluation and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid net: {0}")]
    InvalidNet(String),
    #[error("invalid technology parameters: {0}")]
    InvalidTech(String),
    #[error("invalid solution: {0}")]
    InvalidSolution(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("non-positive width {width} at repeater {index}")]
    NonPositiveWidth { index: usize, width: f64 },
    #[error("no assignment meets the delay target")]
    Infeasible,
    #[error("Newton solve did not converge: {0}")]
    NoConverge(String),
    #[error("live label count {live} exceeds cap {cap}")]
    LabelCap { live: usize, cap: usize },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
