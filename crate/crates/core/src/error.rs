use thiserror::Error;

use crate::partition::Partition;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("direction vector is zero")]
    ZeroDirection,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point is the projection pole (last coordinate -1)")]
    AtPole,

    #[error("point is not on the unit sphere")]
    NotOnSphere,

    #[error("operation requires a nonzero polynomial")]
    ZeroPolynomial,

    #[error("alpha must lie in (0, 1), got {0}")]
    AlphaOutOfRange(f64),

    #[error("invalid parameters: {0}")]
    BadParams(String),

    #[error("I + S is singular; Cayley transform undefined")]
    SingularCayley,

    #[error("direction set is empty")]
    EmptyDirections,

    #[error("flat rank {r} outside 2..={max}")]
    BadRank { r: usize, max: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("enumeration budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid interval: lower end exceeds upper end")]
    InvalidInterval,

    #[error("partition not achieved: max cell {max_cell} exceeds bound {bound:.3}")]
    PartitionNotAchieved {
        max_cell: usize,
        bound: f64,
        best: Box<Partition>,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
