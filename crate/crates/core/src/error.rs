use thiserror::Error;

/// Errors raised by framework construction and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid normed space: {0}")]
    InvalidSpace(String),

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("point is not smooth: {0}")]
    NonSmoothPoint(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid placement: {0}")]
    InvalidPlacement(String),

    #[error("degenerate edge {v}-{w}: endpoints coincide")]
    DegenerateEdge { v: String, w: String },

    #[error("edge {v}-{w} is not well-positioned: difference is not a smooth point")]
    NotWellPositioned { v: String, w: String },

    #[error("size limit exceeded: {what} has {found} elements, limit is {limit}")]
    SizeLimit {
        what: &'static str,
        found: usize,
        limit: usize,
    },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("no well-positioned placement found in {trials} trials")]
    NoWellPositionedSample { trials: usize },

    #[error("Lie algebra validation failed: worst relative norm deviation {worst:e}")]
    LieValidation { worst: f64 },

    #[error("isometry dimension bound violated: {0}")]
    BoundViolation(String),

    #[error("no nontrivial flex direction exists")]
    NoNontrivialDirection,

    #[error("direction is numerically trivial or not a flex (residual {residual:e})")]
    InvalidDirection { residual: f64 },

    #[error("corrector did not converge at step {step}: residual {residual:e}")]
    CorrectorFailed { step: usize, residual: f64 },

    #[error("path reached a configuration where edge {v}-{w} is not smooth at step {step}")]
    PathNotSmooth { v: String, w: String, step: usize },

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
