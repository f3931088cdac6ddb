use thiserror::Error;

/// Errors raised by the analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("unbounded result: {0}")]
    UnboundedResult(String),
    /// PA input drive exceeds the requested per-element output power.
    #[error("infeasible PA drive: input {p_in_dbm:.2} dBm exceeds output {p_out_dbm:.2} dBm")]
    InfeasibleDrive { p_in_dbm: f64, p_out_dbm: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
