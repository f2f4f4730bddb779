use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("vertex {vertex} out of range for graph with {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph is not connected ({components} components)")]
    Disconnected { components: usize },

    #[error("partitions cover different vertex sets ({left} vs {right} vertices)")]
    SizeMismatch { left: usize, right: usize },

    #[error("partition is empty")]
    EmptyPartition,

    #[error("modularity is undefined on a graph without edges")]
    EdgelessGraph,

    #[error("generation failed at stage `{stage}`: {message}")]
    Generation {
        stage: &'static str,
        message: String,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
