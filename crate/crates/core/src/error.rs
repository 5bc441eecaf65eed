use thiserror::Error;

use crate::tiling::HalfTileId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph is empty")]
    EmptyGraph,

    #[error("vertices {0} and {1} lie in different components")]
    DisconnectedPair(usize, usize),

    #[error("source and sink are the same vertex {0}")]
    SameVertex(usize),

    #[error("graph is not connected")]
    NotConnected,

    #[error("size cap exceeded: {size} > {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("half-tile {0} contains no vertex")]
    EmptyHalfTile(HalfTileId),

    #[error("cut is empty")]
    EmptyCut,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("linear solver failed: {0}")]
    SolverFailure(String),

    #[error("random walk exceeded the step cap of {cap} in {failures} of {reps} repetitions")]
    StepCapExceeded {
        cap: u64,
        failures: usize,
        reps: usize,
        partial: crate::walks::WalkStats,
    },

    /// A flow was about to be placed on a pair that is not an edge of the graph.
    #[error("geometric guarantee violated: {0} and {1} are not adjacent")]
    GeometryViolation(usize, usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
