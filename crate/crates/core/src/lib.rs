//! Weighting by a uniform transformer (WUNT).
//!
//! Estimates the average treatment effect on the treated (ATT) from
//! observational data. Control covariates are first pushed through a
//! data-driven map `Φ` that makes their distribution (approximately) uniform
//! on `[0,1]^d`; the counterfactual mean `μ_CT` is then a ratio of kernel
//! U-statistics over control × treated pairs of transformed covariates.
//!
//! Modules:
//! - [`data`]: datasets, CSV I/O and the affine rescale onto `[ε, 1-ε]^d`.
//! - [`transformer`]: adaptive, marginal and plug-in uniform transformers.
//! - [`density`]: higher-order product kernels, projection bases and tuning rules.
//! - [`estimator`]: the kernel and projection estimators, a logistic IPW baseline
//!   and weight export.
//! - [`sim`]: deterministic generators, replication engine, timing bench and the
//!   one-dimensional warm-up demo.

pub mod config;
pub mod data;
pub mod density;
pub mod error;
pub mod estimator;
pub mod sim;
pub mod summation;
pub mod transformer;

pub use config::{BandwidthSpec, BasisSpec, EstimatorConfig, KernelSpec, SampleSizeRule, Smoothness};
pub use data::{Dataset, RescaleMap};
pub use density::{BasisFamily, KernelOrder, ProductKernel, ProjectionBasis};
pub use error::{Error, Result};
pub use estimator::{EstimateReport, EstimatorKind};
pub use transformer::{Partition, SmoothingKernel, UniformTransformer};
