use thiserror::Error;

use crate::exact::ExactError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("increments do not form a geodesic at index {0}")]
    NotGeodesic(usize),
    #[error("not renormalizable: {0}")]
    NotRenormalizable(String),
    #[error("function evaluated outside its domain: {0}")]
    OutOfDomain(String),
    #[error("orbit left the budget of {budget} vertices")]
    OrbitEscapedBudget { budget: usize },
    #[error("trajectory hit a singular point at step {step}; choose a branch")]
    SingularHit { step: usize },
    #[error("refinement budget exhausted: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
