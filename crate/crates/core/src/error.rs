use thiserror::Error;

/// Errors raised by the numerical routines and the scenario runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("insufficient data: need at least {needed} nodes, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("evaluation of {what} failed: {detail}")]
    Evaluation { what: String, detail: String },

    #[error("contour configuration: {0}")]
    Contour(String),

    #[error("insufficient coverage: {detail} (extend by {extend_by})")]
    Coverage { detail: String, extend_by: f64 },

    #[error("kernel is not integrable: {0}")]
    NonIntegrable(String),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("iteration diverged at iterate {iteration}")]
    Divergence { iteration: usize },

    #[error("truncation budget exceeded: {0}")]
    Budget(String),

    #[error("weight function: {0}")]
    Weight(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Scenario {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn coverage(detail: impl Into<String>, extend_by: f64) -> Self {
        Error::Coverage {
            detail: detail.into(),
            extend_by,
        }
    }

    /// Wraps a module error with scenario context.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Scenario {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Configuration problems are reported separately from numerical failures
    /// by the command line front end.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::Json(_) => true,
            Error::Scenario { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
