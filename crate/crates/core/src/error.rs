use crate::integrate::TrajectoryRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("ambient dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point violates the {manifold} constraint (residual {residual:.3e})")]
    OffManifold { manifold: &'static str, residual: f64 },

    #[error("vector is not tangent at its base point (residual {residual:.3e})")]
    NotTangent { residual: f64 },

    #[error("tangent vectors are based at different points")]
    BaseMismatch,

    #[error("{op} is undefined at the cut locus: {detail}")]
    CutLocus { op: &'static str, detail: String },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{op} is not defined for convexity class {class}")]
    UnsupportedClass { op: &'static str, class: &'static str },

    /// From `run`, carries everything recorded up to the step where iterates
    /// blew up; step-level detection has no record to attach.
    #[error("iteration diverged at step {iteration}")]
    Diverged {
        iteration: usize,
        partial: Option<Box<TrajectoryRecord>>,
    },

    #[error("rate estimation failed: {0}")]
    RateEstimation(String),
}
