//! One-dimensional warm-up experiment: controls uniform on `[0, 1]`, so the
//! kernel estimator with `Φ = id` applies directly, and its MSE can be traced
//! across a bandwidth grid.

use serde::{Deserialize, Serialize};

use super::rng::{replication_seed, stream_rng, NormalSource};
use crate::data::Dataset;
use crate::density::{KernelOrder, ProductKernel};
use crate::error::{Error, Result};
use crate::estimator::{estimate_kernel, EstimateError};
use crate::summation::NeumaierSum;
use crate::transformer::UniformTransformer;

use rayon::prelude::*;

/// Number of periods of the rough response.
pub const ROUGH_PERIODS: f64 = 8.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WarmupResponse {
    /// `μ_C(x) = 1{frac(8x) ≥ 1/2}` with treated density 3/2 on the high
    /// halves and 1/2 on the low halves; `μ_CT = 3/4`.
    #[default]
    Rough,
    /// `μ_C(x) = cos(2πx)` with treated density `1 − cos(2πx)`; `μ_CT = −1/2`.
    Smooth,
}

impl WarmupResponse {
    pub fn control_mean(self, x: f64) -> f64 {
        match self {
            WarmupResponse::Rough => f64::from(u8::from((ROUGH_PERIODS * x).fract() >= 0.5)),
            WarmupResponse::Smooth => (std::f64::consts::TAU * x).cos(),
        }
    }

    pub fn treated_density(self, x: f64) -> f64 {
        match self {
            WarmupResponse::Rough => 0.5 + self.control_mean(x),
            WarmupResponse::Smooth => 1.0 - (std::f64::consts::TAU * x).cos(),
        }
    }

    /// `∫ μ_C f_T`.
    pub fn target(self) -> f64 {
        match self {
            WarmupResponse::Rough => 0.75,
            WarmupResponse::Smooth => -0.5,
        }
    }

    fn sample_treated<R: rand::Rng>(self, src: &mut NormalSource<R>) -> f64 {
        match self {
            WarmupResponse::Rough => {
                // Pick a half-period (high with probability 3/4), then a point in it.
                let high = src.uniform() < 0.75;
                let period = (src.uniform() * ROUGH_PERIODS).floor().min(ROUGH_PERIODS - 1.0);
                let offset = if high { 0.5 } else { 0.0 } + 0.5 * src.uniform();
                (period + offset) / ROUGH_PERIODS
            }
            WarmupResponse::Smooth => loop {
                let x = src.uniform();
                if 2.0 * src.uniform() < self.treated_density(x) {
                    break x;
                }
            },
        }
    }
}

impl std::str::FromStr for WarmupResponse {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "rough" => Ok(WarmupResponse::Rough),
            "smooth" => Ok(WarmupResponse::Smooth),
            other => Err(format!("unknown response '{other}' (rough, smooth)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WarmupConfig {
    /// Total sample size, split evenly between the groups.
    pub n: usize,
    pub reps: usize,
    /// Bandwidths to evaluate; empty means [`default_grid`].
    pub grid: Vec<f64>,
    pub response: WarmupResponse,
    /// Smoothness of the treated density in the reference rule `n^{-1/(1+2β)}`.
    pub beta: f64,
    pub seed: u64,
}

impl Default for WarmupConfig {
    fn default() -> Self {
        Self { n: 4000, reps: 50, grid: Vec::new(), response: WarmupResponse::Rough, beta: 0.5, seed: 20_240_101 }
    }
}

/// Ten log-spaced bandwidths from `1/n` to `1/2`.
pub fn default_grid(n: usize) -> Vec<f64> {
    let (lo, hi) = ((1.0 / n as f64).ln(), 0.5f64.ln());
    (0..10).map(|i| (lo + (hi - lo) * i as f64 / 9.0).exp()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarmupRow {
    pub h: f64,
    pub bias: f64,
    pub variance: f64,
    pub mse: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarmupReport {
    pub config: WarmupConfig,
    pub rows: Vec<WarmupRow>,
    /// Grid bandwidth with the smallest MSE.
    pub argmin_h: f64,
    /// Density-estimation rule `n^{-1/(1+2β)}`.
    pub reference_h: f64,
}

impl WarmupReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,bias,variance,mse,failures\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.h, r.bias, r.variance, r.mse, r.failures));
        }
        out
    }
}

/// One warm-up draw: `n/2` uniform controls, `n - n/2` treated from the
/// response's treated density, outcomes `μ_C(x) + N(0, 1)`.
pub fn warmup_dataset(response: WarmupResponse, n: usize, seed: u64) -> Result<Dataset> {
    let n0 = n / 2;
    let n1 = n - n0;
    let mut src = NormalSource::new(stream_rng(seed, 0));
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let xi = if i < n0 { src.uniform() } else { response.sample_treated(&mut src) };
        x.push(xi);
        y.push(response.control_mean(xi) + src.normal());
    }
    let mut z = vec![0u8; n0];
    z.resize(n0 + n1, 1);
    Ok(Dataset::from_parts(x, 1, z, Some(y))?)
}

/// MSE of `μ̂_CT` for every bandwidth in the grid. Each replication's draw is
/// shared across bandwidths.
pub fn run_warmup(cfg: &WarmupConfig) -> Result<WarmupReport> {
    if cfg.n < 4 || cfg.reps < 1 {
        return Err(Error::Config("warm-up needs n >= 4 and reps >= 1".into()));
    }
    if cfg.beta.is_nan() || cfg.beta <= 0.0 {
        return Err(Error::Config(format!("beta must be positive, got {}", cfg.beta)));
    }
    let grid = if cfg.grid.is_empty() { default_grid(cfg.n) } else { cfg.grid.clone() };
    let kernels =
        grid.iter().map(|&h| ProductKernel::isotropic(KernelOrder::Two, h, 1)).collect::<Result<Vec<_>, _>>()?;
    let t = UniformTransformer::identity(1);
    let target = cfg.response.target();
    // errors[r][g]: μ̂_CT − μ_CT, None on overlap failure.
    let errors: Vec<Vec<Option<f64>>> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|r| -> Result<Vec<Option<f64>>> {
            let ds = warmup_dataset(cfg.response, cfg.n, replication_seed(cfg.seed, r))?;
            kernels
                .iter()
                .map(|k| match estimate_kernel(&ds, &t, k) {
                    Ok(rep) => Ok(Some(rep.mu_ct_hat - target)),
                    Err(EstimateError::Overlap { .. }) => Ok(None),
                    Err(e) => Err(e.into()),
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<WarmupRow> = grid
        .iter()
        .enumerate()
        .map(|(g, &h)| {
            let ok: Vec<f64> = errors.iter().filter_map(|e| e[g]).collect();
            let m = ok.len() as f64;
            let mut s = NeumaierSum::new();
            let mut sq = NeumaierSum::new();
            for &e in &ok {
                s.add(e);
                sq.add(e * e);
            }
            let bias = s.value() / m;
            let mse = sq.value() / m;
            WarmupRow { h, bias, variance: mse - bias * bias, mse, failures: cfg.reps - ok.len() }
        })
        .collect();
    let argmin_h = rows
        .iter()
        .filter(|r| r.mse.is_finite())
        .min_by(|a, b| a.mse.total_cmp(&b.mse))
        .map(|r| r.h)
        .unwrap_or(f64::NAN);
    let reference_h = (cfg.n as f64).powf(-1.0 / (1.0 + 2.0 * cfg.beta));
    Ok(WarmupReport { config: cfg.clone(), rows, argmin_h, reference_h })
}
