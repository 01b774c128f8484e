//! Closed-form marginal CDF models for the plug-in (Rosenblatt) transformer.
//!
//! Only product-form densities are supported: the transformer is then the
//! coordinate-wise CDF.

use serde::{Deserialize, Serialize};
use libm::erfc;

use super::TransformError;

#[inline]
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// One-dimensional distribution with an evaluable CDF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum MarginalCdf {
    /// Uniform on `[0, 1]`.
    Uniform,
    Normal { mean: f64, sd: f64 },
    /// Gaussian kernel density estimate over sorted samples.
    Kde { samples: Vec<f64>, bandwidth: f64 },
}

// Beyond this many bandwidths a Gaussian kernel contributes below 1e-16.
const KDE_CUTOFF: f64 = 8.5;

impl MarginalCdf {
    /// Fits a Gaussian KDE with Silverman's rule-of-thumb bandwidth.
    pub fn fit_kde(samples: &[f64]) -> Result<Self, TransformError> {
        if samples.len() < 2 {
            return Err(TransformError::TooFewPoints(samples.len()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / n;
        let sd = (sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let q = |p: f64| {
            let pos = p * (n - 1.0);
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(sorted.len() - 1);
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        };
        let iqr = q(0.75) - q(0.25);
        let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
        if spread <= 0.0 {
            return Err(TransformError::DegenerateSample);
        }
        let bandwidth = 0.9 * spread * n.powf(-0.2);
        Ok(MarginalCdf::Kde { samples: sorted, bandwidth })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            MarginalCdf::Uniform => x.clamp(0.0, 1.0),
            MarginalCdf::Normal { mean, sd } => std_normal_cdf((x - mean) / sd),
            MarginalCdf::Kde { samples, bandwidth } => {
                let lo = samples.partition_point(|&s| s < x - KDE_CUTOFF * bandwidth);
                let hi = samples.partition_point(|&s| s <= x + KDE_CUTOFF * bandwidth);
                let mut acc = lo as f64;
                for &s in &samples[lo..hi] {
                    acc += std_normal_cdf((x - s) / bandwidth);
                }
                (acc / samples.len() as f64).clamp(0.0, 1.0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn normal_cdf_reference_values() {
        assert!((std_normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((std_normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
        assert!((std_normal_cdf(-1.0) - 0.15865525393145707).abs() < 1e-14);
    }

    #[test]
    fn kde_cdf_close_to_normal_on_large_sample() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let draws: Vec<f64> = (0..10_000)
            .map(|_| {
                let u1 = 1.0 - rng.random::<f64>();
                let u2 = rng.random::<f64>();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        let model = MarginalCdf::fit_kde(&draws).unwrap();
        let sup = (0..=800)
            .map(|i| -4.0 + i as f64 * 0.01)
            .map(|x| (model.cdf(x) - std_normal_cdf(x)).abs())
            .fold(0.0, f64::max);
        assert!(sup < 0.02, "sup distance {sup}");
    }

    #[test]
    fn kde_window_matches_full_sum() {
        let samples: Vec<f64> = (0..200).map(|i| ((i * 37) % 200) as f64 / 50.0).collect();
        let model = MarginalCdf::fit_kde(&samples).unwrap();
        let MarginalCdf::Kde { samples: sorted, bandwidth } = &model else { unreachable!() };
        for x in [-1.0, 0.3, 1.7, 2.2, 4.5] {
            let full = sorted.iter().map(|s| std_normal_cdf((x - s) / bandwidth)).sum::<f64>() / 200.0;
            assert!((model.cdf(x) - full).abs() < 1e-14);
        }
    }

    #[test]
    fn kde_rejects_constant_sample() {
        assert!(matches!(MarginalCdf::fit_kde(&[1.0, 1.0, 1.0]), Err(TransformError::DegenerateSample)));
    }
}
