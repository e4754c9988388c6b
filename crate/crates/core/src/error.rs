use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("vertex {0} already present")]
    VertexExists(VertexId),
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge ({0},{1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("edge ({0},{1}) not present")]
    MissingEdge(VertexId, VertexId),
    #[error("graph needs at least 2 vertices, found {0}")]
    TooFewVertices(usize),
    #[error("{what} out of range: {value} (allowed {min}..={max})")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },
    #[error("graph is not minimally persistent: {0}")]
    NotMinimallyPersistent(String),
    #[error("graph is not minimally rigid")]
    NotMinimallyRigid,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("plan diverges at step {step}: {reason}")]
    Diverged { step: usize, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
