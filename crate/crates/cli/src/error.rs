use distortion_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid parameter: {0}")]
    Parameter(CoreError),
    #[error("property violated: {0}")]
    Violation(String),
    #[error("construction failed: {0}")]
    Construction(CoreError),
    #[error("computation failed: {0}")]
    Compute(CoreError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parameter(_) | CliError::Io(_) => 1,
            CliError::Violation(_) => 2,
            CliError::Construction(_) | CliError::Compute(_) => 3,
        }
    }
}

/// Parameter errors are usage errors; everything else from the core is a
/// failed construction or computation.
pub fn classify(e: CoreError) -> CliError {
    match e {
        CoreError::ParameterOutOfRange { .. }
        | CoreError::NegativeRatio(_)
        | CoreError::NonpositiveRatio(_)
        | CoreError::PowerBelowTwo(_)
        | CoreError::InvalidCost(_)
        | CoreError::ResolutionTooLow(..)
        | CoreError::TooFewSamples(..)
        | CoreError::UnsupportedDomain(_) => CliError::Parameter(e),
        CoreError::LambdaOutOfRange(_) | CoreError::AlphaTooSmall(_) | CoreError::BisectionFailed(_) => {
            CliError::Construction(e)
        }
        other => CliError::Compute(other),
    }
}
