use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A document could not be parsed. `field` names the offending key or
    /// column when the parser can tell.
    #[error("failed to parse {document}: {field}: {message}")]
    Parse {
        document: &'static str,
        field: String,
        message: String,
    },

    /// A parsed value violates an invariant. `context` names the beam or field.
    #[error("invalid {context}: {message}")]
    Validation { context: String, message: String },

    /// Input outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("cannot assemble frame: {0}")]
    Assembly(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(document: &'static str, field: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            document,
            field: field.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn validation(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            context: context.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
