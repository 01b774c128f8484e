//! Estimator configuration shared by the library, the CLI and the simulation
//! harness. Every key has a default; unknown keys are rejected when parsing
//! JSON.

use serde::{Deserialize, Serialize};

use crate::density::{self, BasisFamily, DensityError, KernelOrder, ProductKernel, ProjectionBasis};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BandwidthSpec {
    Scalar(f64),
    PerDim(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSpec {
    pub order: KernelOrder,
    /// `None` uses the rate rule `c · n^{-2/(d+2(α+β))}`.
    pub bandwidth: Option<BandwidthSpec>,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self { order: KernelOrder::Two, bandwidth: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisSpec {
    pub family: BasisFamily,
    /// `None` uses the rate rule `c · n^{2d/(d+2(α+β))}`.
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Smoothness {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for Smoothness {
    fn default() -> Self {
        Self { alpha: 1.0, beta: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaleSpec {
    pub c: f64,
}

impl Default for ScaleSpec {
    fn default() -> Self {
        Self { c: 1.0 }
    }
}

/// Which sample size enters the tuning rules.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleSizeRule {
    #[default]
    Total,
    Control,
    Treated,
}

impl SampleSizeRule {
    pub fn pick(self, n0: usize, n1: usize) -> usize {
        match self {
            SampleSizeRule::Total => n0 + n1,
            SampleSizeRule::Control => n0,
            SampleSizeRule::Treated => n1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub kernel: KernelSpec,
    pub basis: BasisSpec,
    pub smoothness: Smoothness,
    pub scale: ScaleSpec,
    pub sample_size: SampleSizeRule,
    /// Margin `ε` of the rescale onto `[ε, 1-ε]^d`.
    pub margin: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::default(),
            basis: BasisSpec::default(),
            smoothness: Smoothness::default(),
            scale: ScaleSpec::default(),
            sample_size: SampleSizeRule::default(),
            margin: crate::data::RescaleMap::DEFAULT_MARGIN,
        }
    }
}

impl EstimatorConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Product kernel for a sample with `n0` controls and `n1` treated units.
    pub fn product_kernel(&self, n0: usize, n1: usize, dim: usize) -> Result<ProductKernel, DensityError> {
        let bandwidths = match &self.kernel.bandwidth {
            Some(BandwidthSpec::Scalar(h)) => vec![*h; dim],
            Some(BandwidthSpec::PerDim(hs)) => {
                if hs.len() != dim {
                    return Err(DensityError::DimensionMismatch { expected: dim, found: hs.len() });
                }
                hs.clone()
            }
            None => {
                let n = self.sample_size.pick(n0, n1);
                let h = density::default_bandwidth(n, dim, self.smoothness.alpha, self.smoothness.beta, self.scale.c)?;
                vec![h; dim]
            }
        };
        ProductKernel::new(self.kernel.order, bandwidths)
    }

    pub fn projection_basis(&self, n0: usize, n1: usize, dim: usize) -> Result<ProjectionBasis, DensityError> {
        let count = match self.basis.count {
            Some(l) => l,
            None => {
                let n = self.sample_size.pick(n0, n1);
                density::default_basis_count(n, dim, self.smoothness.alpha, self.smoothness.beta, self.scale.c)?
            }
        };
        ProjectionBasis::new(self.basis.family, dim, count)
    }
}
