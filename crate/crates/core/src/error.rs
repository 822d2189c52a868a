use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("symbol {symbol} at coordinate {coordinate} lies outside the alphabet of size {m}")]
    SymbolOutOfAlphabet { coordinate: usize, symbol: usize, m: usize },

    #[error("{op} requires a {expected} model, got {got}")]
    KindMismatch {
        op: &'static str,
        expected: &'static str,
        got: String,
    },

    #[error("coordinate {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("parameter vector has length {got}, layout `{layout}` needs {expected}")]
    ParamLength {
        layout: String,
        expected: usize,
        got: usize,
    },

    #[error("parameter {index} is not finite")]
    NonFiniteParam { index: usize },

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("state space has {states} states, above the enumeration limit of {limit}")]
    StateSpaceTooLarge { states: f64, limit: usize },

    #[error("continuous model has no quadrature box declared")]
    QuadratureBoxMissing,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("zero conditional probability at coordinate {coordinate}")]
    ZeroConditional { coordinate: usize },

    #[error("singleton conditional underflow at coordinate {coordinate}")]
    ConditionalUnderflow { coordinate: usize },

    #[error("grid geometry mismatch")]
    GeometryMismatch,

    #[error("density is not positive at node {index} (value {value:e})")]
    NonPositiveDensity { index: usize, value: f64 },

    #[error("q vanishes at node {index} where p is positive")]
    NotAbsolutelyContinuous { index: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("operator {op} cannot act on a {repr} field")]
    OperatorMismatch { op: &'static str, repr: &'static str },

    #[error("smoothing kernel half-width {half_width} exceeds the box width {box_width}")]
    KernelTooWide { half_width: f64, box_width: f64 },

    #[error("density is not contained in its box (boundary/peak ratio {ratio:e})")]
    NotContained { ratio: f64 },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("sample covariance is singular")]
    SingularCovariance,

    #[error("objective is not finite at theta = {theta:?}")]
    NonFiniteObjective { theta: Vec<f64> },

    #[error("objective `{objective}` is incompatible with a {model} model")]
    Incompatible { objective: String, model: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
