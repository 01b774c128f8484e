use thiserror::Error;

use crate::data::DataError;
use crate::density::DensityError;
use crate::estimator::EstimateError;
use crate::transformer::TransformError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-level error, one variant per module.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error("invalid configuration: {0}")]
    Config(String),
}
