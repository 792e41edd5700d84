use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or configuration values.
    #[error("configuration error: {0}")]
    Config(String),

    /// A computation would exceed a configured resource cap.
    #[error("resource error: {0}")]
    Resource(String),

    /// Array or matrix dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Model fitting failed (singular system, duplicate design points, ...).
    #[error("fit error: {0}")]
    Fit(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    /// Config document failed schema validation.
    #[error("config failed validation with {} violation(s)", .0.len())]
    Invalid(Vec<crate::experiment::Violation>),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}
