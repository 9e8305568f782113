use thiserror::Error;

/// Errors surfaced by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Fock space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate cat frame: {0}")]
    DegenerateFrame(String),

    #[error("truncation inadequate: {0}")]
    TruncationInadequate(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("undefined signal-to-noise ratio: {0}")]
    UndefinedSnr(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with all context layers stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for configuration/parse problems, as opposed to numerical failures.
    pub fn is_config(&self) -> bool {
        matches!(
            self.root(),
            Error::Config(_) | Error::Json(_) | Error::Csv(_) | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
