//! Exact points, metrics, closed balls, and covering/packing solvers.

mod cover;
mod metric;
mod point;
mod scalar;

pub use cover::{
    covering_number_exact, covering_number_greedy, min_cover, packing_greedy, parse_points_file, CoverResult,
    CoverTracker, SeparationWitness, WitnessMode,
};
pub use metric::{dist_cmp, in_ball, in_set_ball, sq_dist, Metric};
pub use point::{Coord, Point, SparseVec};
pub use scalar::{Scalar, Surd};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("line {line}: {msg}")]
    ParseAt { line: usize, msg: String },
    #[error("metric `{metric}` does not accept point `{point}`")]
    VariantMismatch { metric: String, point: String },
    #[error("target {0} lies in no candidate ball")]
    UncoverableTarget(String),
    #[error("negative radius {0}")]
    NegativeRadius(String),
}
