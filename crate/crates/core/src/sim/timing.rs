//! Wall-time scaling of the estimators on the Y3 design.

use std::time::Instant;

use serde::Serialize;

use super::models::{generate, ModelId, SimModel};
use super::replicate::EstimatorSpec;
use super::rng::replication_seed;
use crate::config::{BandwidthSpec, EstimatorConfig};
use crate::error::{Error, Result};
use crate::estimator::EstimatorKind;
use crate::transformer::UniformTransformer;

pub const DEFAULT_SIZES: [usize; 3] = [1000, 2000, 5000];
pub const DEFAULT_REPS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub estimator: String,
    pub n: usize,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingTable {
    pub rows: Vec<TimingRow>,
    /// Least-squares slope of `ln(seconds)` on `ln(n)` per estimator.
    pub slopes: Vec<(String, f64)>,
    /// Tuning actually used (frozen across sizes).
    pub config: EstimatorConfig,
    pub threads: usize,
}

impl TimingTable {
    pub fn slope(&self, label: &str) -> Option<f64> {
        self.slopes.iter().find(|(l, _)| l == label).map(|&(_, s)| s)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("estimator,n,mean_seconds\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.estimator, r.n, r.mean_seconds));
        }
        out
    }

    pub fn slopes_csv(&self) -> String {
        let mut out = String::from("estimator,loglog_slope\n");
        for (l, s) in &self.slopes {
            out.push_str(&format!("{l},{s}\n"));
        }
        out
    }
}

/// Least-squares slope of `y` on `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Pins `h` and `L` to their rule values at sample size `n` so the cost of
/// each estimator is measured at fixed tuning.
pub fn freeze_tuning(cfg: &EstimatorConfig, n: usize, dim: usize) -> Result<EstimatorConfig> {
    let mut frozen = cfg.clone();
    let rule_n = n;
    if frozen.kernel.bandwidth.is_none() {
        let h = crate::density::default_bandwidth(rule_n, dim, cfg.smoothness.alpha, cfg.smoothness.beta, cfg.scale.c)?;
        frozen.kernel.bandwidth = Some(BandwidthSpec::Scalar(h));
    }
    if frozen.basis.count.is_none() {
        let l = crate::density::default_basis_count(rule_n, dim, cfg.smoothness.alpha, cfg.smoothness.beta, cfg.scale.c)?;
        frozen.basis.count = Some(l);
    }
    Ok(frozen)
}

/// Mean wall time (transformer fit plus estimation) over `reps` Y3 draws per
/// size, run on a pool of `threads` workers. Unset `h` and `L` are frozen at
/// their rule values for the smallest size.
pub fn timing_bench(
    sizes: &[usize],
    specs: &[EstimatorSpec],
    cfg: &EstimatorConfig,
    reps: usize,
    seed: u64,
    threads: usize,
) -> Result<TimingTable> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("sizes must be non-empty and strictly ascending".into()));
    }
    if reps < 1 {
        return Err(Error::Config("need at least one replication".into()));
    }
    let frozen = freeze_tuning(cfg, sizes[0], ModelId::Y3.dim())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let mut rows = Vec::new();
    pool.install(|| -> Result<()> {
        for spec in specs {
            for &n in sizes {
                let model = SimModel::y3_y4(ModelId::Y3, n)?;
                let mut total = 0.0;
                for r in 0..reps as u64 {
                    let draw = generate(&model, replication_seed(seed, r))?;
                    let start = Instant::now();
                    spec.estimate(&draw, &frozen)?;
                    total += start.elapsed().as_secs_f64();
                }
                rows.push(TimingRow { estimator: spec.label(), n, mean_seconds: total / reps as f64 });
            }
        }
        Ok(())
    })?;
    let slopes = specs
        .iter()
        .map(|s| {
            let label = s.label();
            let (x, y): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| r.estimator == label)
                .map(|r| ((r.n as f64).ln(), r.mean_seconds.max(1e-9).ln()))
                .unzip();
            let slope = if x.len() > 1 { fit_slope(&x, &y) } else { f64::NAN };
            (label, slope)
        })
        .collect();
    Ok(TimingTable { rows, slopes, config: frozen, threads: threads.max(1) })
}

/// Seconds to build the adaptive transformer on a Y3 draw of size `n`.
pub fn adaptive_build_seconds(n: usize, seed: u64, margin: f64) -> Result<f64> {
    let draw = generate(&SimModel::y3_y4(ModelId::Y3, n)?, seed)?;
    let start = Instant::now();
    let t = UniformTransformer::fit_adaptive(&draw.labeled, margin)?;
    let secs = start.elapsed().as_secs_f64();
    drop(t);
    Ok(secs)
}

/// The four transformer-by-density combinations.
pub fn wunt_specs() -> Vec<EstimatorSpec> {
    use super::replicate::TransformerChoice::{Joint, Marginal};
    vec![
        EstimatorSpec::new(EstimatorKind::Kernel, Joint),
        EstimatorSpec::new(EstimatorKind::Kernel, Marginal),
        EstimatorSpec::new(EstimatorKind::Projection, Joint),
        EstimatorSpec::new(EstimatorKind::Projection, Marginal),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let x: Vec<f64> = [1000f64, 2000.0, 5000.0].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 3.0).collect();
        assert!((fit_slope(&x, &y) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn frozen_tuning_uses_smallest_size() {
        let cfg = freeze_tuning(&EstimatorConfig::default(), 1000, 4).unwrap();
        assert_eq!(cfg.kernel.bandwidth, Some(BandwidthSpec::Scalar(1000f64.powf(-2.0 / 8.0))));
        assert_eq!(cfg.basis.count, Some(1000));
    }

    #[test]
    fn small_bench_produces_every_row() {
        let t = timing_bench(&[100, 200], &wunt_specs(), &EstimatorConfig::default(), 2, 1, 1).unwrap();
        assert_eq!(t.rows.len(), 8);
        assert_eq!(t.slopes.len(), 4);
        assert!(t.rows.iter().all(|r| r.mean_seconds >= 0.0));
        assert!(timing_bench(&[200, 100], &wunt_specs(), &EstimatorConfig::default(), 1, 1, 1).is_err());
    }
}
