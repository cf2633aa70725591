use thiserror::Error;

/// Errors raised by the signal, medium, filter and objective layers.
#[derive(Debug, Error)]
pub enum AwiError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A ratio such as ‖Tu‖/‖u‖ was requested for a zero input.
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Synthesized signal support does not fit the trace window.
    #[error("window error: {0}")]
    Window(String),

    #[error("degenerate operator: {0}")]
    DegenerateOperator(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("pair set mismatch: {0}")]
    PairMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl AwiError {
    /// True for errors caused by bad inputs rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            AwiError::InvalidArgument(_)
                | AwiError::Domain(_)
                | AwiError::InvalidModel(_)
                | AwiError::Window(_)
                | AwiError::PairMismatch(_)
                | AwiError::Parse(_)
                | AwiError::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, AwiError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(AwiError::InvalidArgument(msg.into()))
}
