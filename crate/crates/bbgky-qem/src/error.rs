//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any layer of the crate.
///
/// The CLI maps these onto exit codes: config/parse errors to 2, guard
/// violations to 3, numerical failures (invariant breaches) to 4.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed textual input (Hamiltonian/observable files, Pauli notation).
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// Invalid configuration or arguments.
    #[error("config error: {0}")]
    Config(String),

    /// A resource guard refused the request (e.g. system size too large).
    #[error("guard violation: {0}")]
    Guard(String),

    /// A numerical invariant was breached at run time.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn guard(msg: impl Into<String>) -> Self {
        Error::Guard(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn parse(line: usize, column: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
