use thiserror::Error;

use crate::region::Region;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed scalar {0:?}")]
    ScalarParse(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fixed point at {0}")]
    FixedPointFound(Box<Scalar>),

    #[error("displacement is zero on a region of positive measure (map {map})")]
    DisplacementZeroEverywhere { map: usize },

    #[error("epsilon must be positive")]
    NonPositiveEps,

    #[error("flip regions overlap on {0:?}")]
    VertexDisjointnessViolated(Region),

    #[error("matching invalid: {0}")]
    InvalidMatching(String),

    #[error("iteration cap exceeded after {rounds} rounds (cap {cap})")]
    IterationCapExceeded { rounds: u64, cap: String },

    #[error("graph is not 2-regular: {0}")]
    NotTwoRegular(String),

    #[error("graph is not 2-regular outside a small degree-1 set: {0}")]
    NotNearTwoRegular(String),

    #[error("path enumeration refused: worst-case branching {branching} exceeds cap {cap}")]
    EnumerationCap { branching: String, cap: String },

    #[error("instance invalid: {0}")]
    InstanceInvalid(String),

    #[error("defect {defect} is too large for epsilon {eps}")]
    DefectTooLarge { defect: Box<Scalar>, eps: Box<Scalar> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
