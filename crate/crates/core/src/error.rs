use alloc::string::String;

/// Errors raised by the simulator and protocol engines.
///
/// Protocol aborts are not errors: they are part of a session's result.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("value {value} out of range (must be < {bound})")]
    OutOfRange { value: u32, bound: u32 },
    #[error("degenerate measurement: both outcomes have vanishing probability")]
    DegenerateMeasurement,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("transcript rejected at entry {index}: {reason}")]
    Transcript { index: usize, reason: String },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn arg(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
