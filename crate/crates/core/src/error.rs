use thiserror::Error;

/// Errors raised by the engines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("weight {value} for outcome {outcome} is negative")]
    NegativeWeight { outcome: String, value: f64 },
    #[error("all weights are zero")]
    ZeroTotal,
    #[error("weight {0} is not finite")]
    NonFiniteWeight(f64),
    #[error("probabilities {p1} + {p2} exceed 1")]
    ProbabilityOverflow { p1: f64, p2: f64 },
    #[error("negative probability {0}")]
    NegativeProbability(f64),
    #[error("|{a1} + {a2}| exceeds 1")]
    AmplitudeOverflow { a1: f64, a2: f64 },
    #[error("malformed feasibility targets: {0}")]
    MalformedTargets(String),
    #[error("invalid pair distribution: {0}")]
    InvalidPairDistribution(String),
    #[error("invalid joint distribution: {0}")]
    InvalidJoint(String),
    #[error("angle {0} is not finite")]
    NonFiniteAngle(f64),
    #[error("trial counts are empty")]
    EmptyCounts,
    #[error("expected pair counts, got quadruple counts")]
    NotPairCounts,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed outcome key {0:?}")]
    MalformedKey(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
