use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = SgaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SgaError {
    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("conflicting signs for pair ({0}, {1})")]
    ConflictingSigns(usize, usize),

    #[error("node {node} out of range (graph has {num_nodes} nodes)")]
    UnknownNode { node: usize, num_nodes: usize },

    #[error("edge ({0}, {1}) already present")]
    EdgeExists(usize, usize),

    #[error("edge ({0}, {1}) not present")]
    EdgeMissing(usize, usize),

    #[error("dimension mismatch at {layer}: expected {expected}, got {got}")]
    DimensionMismatch {
        layer: String,
        expected: String,
        got: String,
    },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    InvalidConfig(Vec<String>),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SgaError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SgaError::Io {
            path: path.into(),
            source,
        }
    }
}
