use thiserror::Error;

/// Errors raised by the distortion toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is zero; polar factor undefined")]
    ZeroMatrix,
    #[error("determinant {0} is negative; well distances require det >= 0")]
    NegativeDeterminant(f64),
    #[error("determinant {0} is not positive")]
    NonpositiveDeterminant(f64),
    #[error("parameter {name} = {value} outside [{lo}, {hi}]")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("volume ratio {0} is negative")]
    NegativeRatio(f64),
    #[error("volume ratio {0} is not positive")]
    NonpositiveRatio(f64),
    #[error("power p = {0} is below 2")]
    PowerBelowTwo(f64),
    #[error("cost argument {0} is not positive")]
    NonpositiveArgument(f64),
    #[error("invalid cost function: {0}")]
    InvalidCost(String),
    #[error("radius {r} outside map domain (inner radius {inner})")]
    RadiusOutOfDomain { r: f64, inner: f64 },
    #[error("lambda = {0} has no twist minimizer (need 0 < lambda <= 1/2)")]
    LambdaOutOfRange(f64),
    #[error("alpha = {0} must exceed 2")]
    AlphaTooSmall(f64),
    #[error("bisection failed: {0}")]
    BisectionFailed(String),
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),
    #[error("resolution {0} too low (need at least {1})")]
    ResolutionTooLow(usize, usize),
    #[error("map evaluation failed at ({x}, {y})")]
    MapEvaluationFailure { x: f64, y: f64 },
    #[error("singular value vanishes at ({x}, {y}) where the cost is undefined")]
    NonpositiveSingularValue { x: f64, y: f64 },
    #[error("target volume {v_n} is smaller than the image volume {v_image}")]
    VolumeInconsistent { v_n: f64, v_image: f64 },
    #[error("map cannot be evaluated within margin {h} of node ({x}, {y})")]
    EvaluationMargin { x: f64, y: f64, h: f64 },
    #[error("field grid has no interior nodes")]
    GridTooSmall,
    #[error("near-singular differential at node ({x}, {y}); sigma1 = {sigma1}")]
    SingularNode { x: f64, y: f64, sigma1: f64 },
    #[error("too few samples: {0} (need at least {1})")]
    TooFewSamples(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;
