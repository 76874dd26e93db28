use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid sizes, generator parameters or configuration values.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Graph structure does not satisfy an operation's precondition
    /// (disconnected, unreachable nodes, negative cycle, bad route set).
    #[error("structure error: {0}")]
    Structure(String),

    #[error("shape error: {0}")]
    Shape(String),

    /// Every action was masked at a decoding step.
    #[error("decoding error: {0}")]
    Decoding(String),

    /// An action that the current state forbids.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Malformed checkpoint, TSPLIB file, graph file or CSV.
    #[error("format error: {0}")]
    Format(String),

    #[error("training error: {0}")]
    Training(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
