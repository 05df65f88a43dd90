use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("node sets overlap on `{0}`")]
    OverlappingSets(String),
    #[error("edge {parent} -> {child} would create a cycle")]
    Cycle { parent: String, child: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("guard exceeded: {what} = {value} > {limit}")]
    GuardExceeded { what: &'static str, value: u128, limit: u128 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("empty set: {0}")]
    EmptySet(&'static str),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
