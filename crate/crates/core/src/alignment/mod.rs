//! Localization objective: per-class edge extraction, clamped distance
//! fields, the Huber penalty and the symmetric semantic Chamfer terms.

mod distance;
mod edges;
mod loss;

pub use distance::{build_distance_fields, squared_edt, DistanceFieldStack};
pub use edges::{extract_edges, ClassEdgeSets};
pub use loss::{
    forward_loss, huber, reverse_loss, total_loss, LossBreakdown, LossConfig, Observation,
    ProjectionIndex, ReverseWeighting,
};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AlignmentError {
    #[error("no evidence: {0}")]
    NoEvidence(&'static str),
    #[error("invalid loss configuration: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: {0}")]
    Mismatch(String),
}
