use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslabError {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested index or rank does not fit the sampling resolution.
    #[error("resolution error: {what} requires resolution {required}, have {available}")]
    Resolution {
        what: String,
        required: u32,
        available: u32,
    },

    /// Q_n vanished where a normalisation by Q_n is needed.
    #[error("degenerate weights: Q_{n} = 0")]
    DegenerateWeights { n: usize },

    /// The numeric representation cannot carry the requested computation.
    #[error("numeric mode error: {0}")]
    Mode(String),

    /// Malformed textual input (rationals, presets, grids).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl DslabError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        DslabError::Domain(msg.into())
    }

    pub(crate) fn mode(msg: impl Into<String>) -> Self {
        DslabError::Mode(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        DslabError::Parse(msg.into())
    }

    pub(crate) fn resolution(what: impl Into<String>, required: u32, available: u32) -> Self {
        DslabError::Resolution {
            what: what.into(),
            required,
            available,
        }
    }
}

impl From<std::io::Error> for DslabError {
    fn from(e: std::io::Error) -> Self {
        DslabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, DslabError>;
