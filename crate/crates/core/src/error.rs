use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch at layer {layer}: expected {expected}, got {actual}")]
    LayerDimension {
        layer: usize,
        expected: usize,
        actual: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("backward called without a recorded forward pass")]
    NoForwardPass,

    #[error("non-finite gradient in layer {layer}")]
    NonFiniteGradient { layer: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}: {what}")]
    Diverged { epoch: usize, what: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("constant column {column} cannot be standardized")]
    ConstantColumn { column: &'static str },

    #[error("schema error{}: {message}", location_suffix(*.row, .column.as_deref()))]
    Schema {
        row: Option<usize>,
        column: Option<String>,
        message: String,
    },

    #[error("no generated samples fall inside the training domain")]
    NoInDomainSamples,

    #[error("missing model reports: {0:?}")]
    MissingModels(Vec<String>),

    #[error("corrupt checkpoint: {0}")]
    Checkpoint(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

fn location_suffix(row: Option<usize>, column: Option<&str>) -> String {
    match (row, column) {
        (Some(r), Some(c)) => format!(" at row {r}, column {c}"),
        (Some(r), None) => format!(" at row {r}"),
        (None, Some(c)) => format!(" in column {c}"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(message: impl Into<String>) -> Self {
        Error::Schema {
            row: None,
            column: None,
            message: message.into(),
        }
    }

    /// Tags numerical failures inside a training loop with the epoch.
    pub(crate) fn at_epoch(self, epoch: usize) -> Self {
        match self {
            Error::NonFinite(what) => Error::Diverged { epoch, what },
            Error::NonFiniteGradient { layer } => Error::Diverged {
                epoch,
                what: format!("non-finite gradient in layer {layer}"),
            },
            other => other,
        }
    }

    /// Process exit code used by the command-line front end.
    ///
    /// 1 = usage, 2 = data/schema, 3 = numerical divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) | Error::MissingModels(_) => 1,
            Error::Diverged { .. } | Error::NonFinite(_) | Error::NonFiniteGradient { .. } => 3,
            _ => 2,
        }
    }
}
