use crate::graph::{EdgeId, NodeId};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error("coordinates look geographic (lon/lat); a projected CRS in meters is required")]
    GeographicCoordinates,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(EdgeId),
    #[error("edge {0} is a self-loop")]
    SelfLoop(EdgeId),
    #[error("edge {edge}: {reason}")]
    InconsistentEdge { edge: EdgeId, reason: &'static str },
    #[error("edge {edge} has weight {weight}, expected {expected}")]
    BadWeight {
        edge: EdgeId,
        weight: f64,
        expected: &'static str,
    },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("correlation undefined: zero variance")]
    ZeroVariance,
    #[error("invariant violated: {0}")]
    Invariant(&'static str),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: &'static str) -> Self {
        Error::InvalidParameter { name, reason }
    }
}
