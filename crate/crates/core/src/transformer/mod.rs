//! Uniform transformers: maps sending the control covariate law to
//! (approximately) the uniform distribution on `[0,1]^d`.
//!
//! Three constructions are provided:
//! - [`UniformTransformer::adaptive`]: the hierarchical equal-count partition
//!   with `S`-smoothing inside each interval (the "joint" transformer);
//! - [`UniformTransformer::marginal`]: the one-dimensional adaptive map applied
//!   coordinate-wise with one interval per control point;
//! - [`UniformTransformer::rosenblatt_plugin`]: coordinate-wise CDFs of a
//!   product-form density, typically fitted on extra unlabeled controls.
//!
//! A built transformer is immutable; evaluation is reentrant.

mod partition;
mod plugin;
mod smoothing;

use rayon::prelude::*;
use thiserror::Error;

use crate::data::{DataError, Dataset, RescaleMap};

pub use partition::{cells_per_axis, Partition, PartitionNode};
pub use plugin::{std_normal_cdf, MarginalCdf};
pub use smoothing::SmoothingKernel;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("need at least one control point to build a partition, found {0}")]
    TooFewPoints(usize),
    #[error("point {row}, coordinate {coordinate} = {value} lies outside [0, 1]")]
    OutOfDomain { row: usize, coordinate: usize, value: f64 },
    #[error("dimension mismatch: transformer expects {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("sample has zero spread; cannot fit a density")]
    DegenerateSample,
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransformerKind {
    Identity,
    /// Joint adaptive partition over all coordinates.
    Adaptive(Partition),
    /// One one-dimensional partition per coordinate.
    Marginal(Vec<Partition>),
    /// Coordinate-wise CDFs of a product-form density.
    RosenblattPlugin(Vec<MarginalCdf>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformTransformer {
    kind: TransformerKind,
    rescale: Option<RescaleMap>,
    smoothing: SmoothingKernel,
    dim: usize,
}

impl UniformTransformer {
    pub fn identity(dim: usize) -> Self {
        Self { kind: TransformerKind::Identity, rescale: None, smoothing: SmoothingKernel::default(), dim }
    }

    /// Adaptive transformer from raw control covariates (row-major). The
    /// rescale map sends them into the unit cube first.
    pub fn adaptive(control: &[f64], rescale: RescaleMap, smoothing: SmoothingKernel) -> Result<Self, TransformError> {
        let dim = rescale.dim();
        check_rows(control, dim)?;
        let unit = rescale.apply_rows(control);
        let partition = Partition::build(&unit, dim)?;
        Ok(Self { kind: TransformerKind::Adaptive(partition), rescale: Some(rescale), smoothing, dim })
    }

    /// Marginal transformer: per coordinate, the one-dimensional adaptive map
    /// with `N0 = n0`, i.e. a smoothed empirical CDF.
    pub fn marginal(control: &[f64], rescale: RescaleMap, smoothing: SmoothingKernel) -> Result<Self, TransformError> {
        let dim = rescale.dim();
        check_rows(control, dim)?;
        let n0 = control.len() / dim;
        if n0 < 2 {
            return Err(TransformError::TooFewPoints(n0));
        }
        let unit = rescale.apply_rows(control);
        let partitions = (0..dim)
            .map(|k| {
                let column: Vec<f64> = unit.chunks_exact(dim).map(|r| r[k]).collect();
                Partition::build(&column, 1)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { kind: TransformerKind::Marginal(partitions), rescale: Some(rescale), smoothing, dim })
    }

    pub fn rosenblatt_plugin(models: Vec<MarginalCdf>) -> Self {
        let dim = models.len();
        Self { kind: TransformerKind::RosenblattPlugin(models), rescale: None, smoothing: SmoothingKernel::default(), dim }
    }

    /// Plug-in transformer whose marginals are Gaussian KDEs fitted on
    /// `samples` (row-major, usually an unlabeled control pool).
    pub fn plugin_from_samples(samples: &[f64], dim: usize) -> Result<Self, TransformError> {
        check_rows(samples, dim)?;
        let models = (0..dim)
            .map(|k| {
                let column: Vec<f64> = samples.chunks_exact(dim).map(|r| r[k]).collect();
                MarginalCdf::fit_kde(&column)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::rosenblatt_plugin(models))
    }

    /// Adaptive transformer on the control rows of `ds`, rescaled using
    /// control and treated rows.
    pub fn fit_adaptive(ds: &Dataset, margin: f64) -> Result<Self, TransformError> {
        let (control, rescale) = fit_inputs(ds, None, margin)?;
        Self::adaptive(&control, rescale, SmoothingKernel::default())
    }

    pub fn fit_marginal(ds: &Dataset, margin: f64) -> Result<Self, TransformError> {
        let (control, rescale) = fit_inputs(ds, None, margin)?;
        Self::marginal(&control, rescale, SmoothingKernel::default())
    }

    /// Adaptive transformer built on an extra pool of unlabeled control
    /// covariates instead of the labeled controls.
    pub fn fit_adaptive_with_pool(ds: &Dataset, pool: &Dataset, margin: f64) -> Result<Self, TransformError> {
        let (control, rescale) = fit_inputs(ds, Some(pool), margin)?;
        Self::adaptive(&control, rescale, SmoothingKernel::default())
    }

    pub fn fit_marginal_with_pool(ds: &Dataset, pool: &Dataset, margin: f64) -> Result<Self, TransformError> {
        let (control, rescale) = fit_inputs(ds, Some(pool), margin)?;
        Self::marginal(&control, rescale, SmoothingKernel::default())
    }

    pub fn kind(&self) -> &TransformerKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rescale(&self) -> Option<&RescaleMap> {
        self.rescale.as_ref()
    }

    pub fn smoothing(&self) -> SmoothingKernel {
        self.smoothing
    }

    pub fn partition(&self) -> Option<&Partition> {
        match &self.kind {
            TransformerKind::Adaptive(p) => Some(p),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            TransformerKind::Identity => "identity",
            TransformerKind::Adaptive(_) => "joint",
            TransformerKind::Marginal(_) => "marginal",
            TransformerKind::RosenblattPlugin(_) => "plugin",
        }
    }

    /// Evaluates `Φ(x)` into `out`. Rescaled coordinates that fall outside
    /// `[0, 1]` are clamped to the boundary.
    pub fn transform_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        match &self.rescale {
            Some(map) => {
                for k in 0..self.dim {
                    out[k] = map.apply_coord(k, x[k]).clamp(0.0, 1.0);
                }
            }
            None => out.copy_from_slice(x),
        }
        match &self.kind {
            TransformerKind::Identity => {}
            TransformerKind::Adaptive(p) => {
                let unit = out.to_vec();
                p.transform(&self.smoothing, &unit, out);
            }
            TransformerKind::Marginal(parts) => {
                let mut v = [0.0];
                for (k, p) in parts.iter().enumerate() {
                    p.transform(&self.smoothing, &[out[k]], &mut v);
                    out[k] = v[0];
                }
            }
            TransformerKind::RosenblattPlugin(models) => {
                for (k, m) in models.iter().enumerate() {
                    out[k] = m.cdf(out[k]);
                }
            }
        }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.transform_into(x, &mut out);
        out
    }

    /// Transforms a row-major block of points. Rows are independent, so this
    /// runs in parallel with identical output for any thread count.
    pub fn transform_rows(&self, rows: &[f64]) -> Result<Vec<f64>, TransformError> {
        check_rows(rows, self.dim)?;
        let mut out = vec![0.0; rows.len()];
        out.par_chunks_mut(self.dim)
            .zip(rows.par_chunks(self.dim))
            .for_each(|(o, x)| self.transform_into(x, o));
        Ok(out)
    }

    /// Replaces the covariates of `ds` by `Φ(X_i)`; treatment and outcome are
    /// untouched. Applying a transformer twice is not the same as once.
    pub fn transform_dataset(&self, ds: &Dataset) -> Result<Dataset, TransformError> {
        if ds.dim() != self.dim {
            return Err(TransformError::DimensionMismatch { expected: self.dim, found: ds.dim() });
        }
        let u = self.transform_rows(ds.covariates())?;
        Ok(ds.with_covariates(u)?)
    }
}

fn check_rows(rows: &[f64], dim: usize) -> Result<(), TransformError> {
    if dim == 0 || rows.len() % dim != 0 {
        return Err(TransformError::DimensionMismatch { expected: dim, found: rows.len() % dim.max(1) });
    }
    Ok(())
}

/// Control covariates (labeled or pooled) and the rescale map fitted on the
/// union of those controls and the treated rows.
fn fit_inputs(ds: &Dataset, pool: Option<&Dataset>, margin: f64) -> Result<(Vec<f64>, RescaleMap), TransformError> {
    let treated = ds.group_covariates(true);
    let control = match pool {
        Some(p) => {
            if p.dim() != ds.dim() {
                return Err(TransformError::DimensionMismatch { expected: ds.dim(), found: p.dim() });
            }
            p.covariates().to_vec()
        }
        None => ds.group_covariates(false),
    };
    if control.is_empty() {
        return Err(TransformError::TooFewPoints(0));
    }
    let mut union_control = control.clone();
    if pool.is_some() {
        union_control.extend(ds.group_covariates(false));
    }
    let rescale = RescaleMap::fit(&union_control, &treated, ds.dim(), margin)?;
    Ok((control, rescale))
}
