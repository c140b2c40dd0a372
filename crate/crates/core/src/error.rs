use thiserror::Error;

/// Errors shared by all kernel modules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("point is not in the set")]
    PointNotInSet,
    #[error("point is not in the graph")]
    PointNotInGraph,
    #[error("point is not in the image")]
    PointNotInImage,
    #[error("set is empty")]
    EmptySet,
    #[error("point is outside the map domain")]
    DomainError,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("infimal projection is unbounded below")]
    UnboundedBelow,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
