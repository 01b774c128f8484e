//! Weighted estimators of the counterfactual mean `μ_CT` and the ATT.

pub mod ipw;
pub mod ustat;

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, Dataset};
use crate::density::{DensityError, ProductKernel, ProjectionBasis};
use crate::summation::{self, NeumaierSum};
use crate::transformer::{TransformError, UniformTransformer};

pub use ipw::{fit_logistic, LogisticFit};

/// Relative threshold on the ratio denominator, scaled by `n0 · n1`.
pub const OVERLAP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error("no overlap between groups: pairwise kernel sum {denominator:e} is below {threshold:e}")]
    Overlap { denominator: f64, threshold: f64 },
    #[error("logistic fit did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("logistic fit failed: treatment is perfectly separated by the covariates")]
    Separation,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("report carries no weights")]
    NoWeights,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "kernel")]
    Kernel,
    #[serde(rename = "projection")]
    Projection,
    #[serde(rename = "ipw-logistic")]
    IpwLogistic,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Kernel => "kernel",
            EstimatorKind::Projection => "projection",
            EstimatorKind::IpwLogistic => "ipw-logistic",
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kernel" => Ok(EstimatorKind::Kernel),
            "projection" => Ok(EstimatorKind::Projection),
            "ipw-logistic" | "ipw" => Ok(EstimatorKind::IpwLogistic),
            other => Err(format!("unknown estimator '{other}' (kernel, projection, ipw-logistic)")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport {
    pub mu_ct_hat: f64,
    pub tau_att_hat: f64,
    /// Mean treated outcome.
    pub mu_tt_hat: f64,
    pub estimator: EstimatorKind,
    pub transformer: String,
    pub config: serde_json::Value,
    pub numerator: f64,
    pub denominator: f64,
    pub n0: usize,
    pub n1: usize,
    pub seconds: f64,
    /// Per-row weights in input order: 1 for treated rows, normalized weights
    /// for controls.
    #[serde(skip)]
    pub weights: Vec<f64>,
    #[serde(skip)]
    pub treatment: Vec<u8>,
}

impl EstimateReport {
    pub fn control_weight_sum(&self) -> f64 {
        summation::sum(self.weights.iter().zip(&self.treatment).filter(|(_, &z)| z == 0).map(|(&w, _)| w))
    }

    pub fn has_negative_weights(&self) -> bool {
        self.weights.iter().any(|&w| w < 0.0)
    }
}

/// Control and treated rows of the transformed covariates, plus control outcomes.
struct Split {
    control: Vec<f64>,
    treated: Vec<f64>,
    y_control: Vec<f64>,
    mu_tt: f64,
}

fn split(ds: &Dataset, u: &[f64]) -> Result<Split, EstimateError> {
    let y = ds.check_estimable()?;
    let d = ds.dim();
    let mut control = Vec::with_capacity(ds.n_control() * d);
    let mut treated = Vec::with_capacity(ds.n_treated() * d);
    let mut y_control = Vec::with_capacity(ds.n_control());
    let mut tt = NeumaierSum::new();
    for (i, row) in u.chunks_exact(d).enumerate() {
        if ds.is_treated(i) {
            treated.extend_from_slice(row);
            tt.add(y[i]);
        } else {
            control.extend_from_slice(row);
            y_control.push(y[i]);
        }
    }
    let mu_tt = tt.value() / ds.n_treated() as f64;
    Ok(Split { control, treated, y_control, mu_tt })
}

fn transformed(ds: &Dataset, t: &UniformTransformer) -> Result<Vec<f64>, EstimateError> {
    if t.dim() != ds.dim() {
        return Err(EstimateError::DimensionMismatch { expected: t.dim(), found: ds.dim() });
    }
    Ok(t.transform_rows(ds.covariates())?)
}

/// Assembles a report from per-control inner sums.
fn finish(
    ds: &Dataset,
    s: &Split,
    inner: &[f64],
    estimator: EstimatorKind,
    transformer: &str,
    config: serde_json::Value,
    start: Instant,
) -> Result<EstimateReport, EstimateError> {
    let (n0, n1) = (ds.n_control(), ds.n_treated());
    let (numerator, denominator) = ustat::ratio_parts(inner, &s.y_control);
    let threshold = OVERLAP_TOLERANCE * (n0 as f64) * (n1 as f64);
    if denominator.is_nan() || denominator.abs() < threshold {
        return Err(EstimateError::Overlap { denominator, threshold });
    }
    let mu_ct_hat = numerator / denominator;
    let mut weights = vec![1.0; ds.len()];
    let mut c = 0;
    for (i, w) in weights.iter_mut().enumerate() {
        if !ds.is_treated(i) {
            *w = inner[c] / denominator;
            c += 1;
        }
    }
    Ok(EstimateReport {
        mu_ct_hat,
        tau_att_hat: s.mu_tt - mu_ct_hat,
        mu_tt_hat: s.mu_tt,
        estimator,
        transformer: transformer.to_string(),
        config,
        numerator,
        denominator,
        n0,
        n1,
        seconds: start.elapsed().as_secs_f64(),
        weights,
        treatment: ds.treatment().to_vec(),
    })
}

/// Kernel estimator: `μ̂_CT = Σ Y_c K_H(U_c − U_t) / Σ K_H(U_c − U_t)` over
/// all control × treated pairs of `U = Φ(X)`.
pub fn estimate_kernel(ds: &Dataset, t: &UniformTransformer, k: &ProductKernel) -> Result<EstimateReport, EstimateError> {
    let start = Instant::now();
    if k.dim() != ds.dim() {
        return Err(EstimateError::DimensionMismatch { expected: ds.dim(), found: k.dim() });
    }
    let u = transformed(ds, t)?;
    let s = split(ds, &u)?;
    let inner = ustat::kernel_inner_sums(&s.control, &s.treated, ds.dim(), k);
    let config = serde_json::json!({ "order": k.order().as_u8(), "bandwidth": k.bandwidths() });
    finish(ds, &s, &inner, EstimatorKind::Kernel, t.name(), config, start)
}

/// Projection estimator with `K_L(u, v) = Σ_l ψ_l(u) ψ_l(v)`, evaluated in
/// factored form.
pub fn estimate_projection(
    ds: &Dataset,
    t: &UniformTransformer,
    b: &ProjectionBasis,
) -> Result<EstimateReport, EstimateError> {
    projection_impl(ds, t, b, false)
}

/// Same as [`estimate_projection`] but with the pairwise double sum.
pub fn estimate_projection_direct(
    ds: &Dataset,
    t: &UniformTransformer,
    b: &ProjectionBasis,
) -> Result<EstimateReport, EstimateError> {
    projection_impl(ds, t, b, true)
}

fn projection_impl(
    ds: &Dataset,
    t: &UniformTransformer,
    b: &ProjectionBasis,
    direct: bool,
) -> Result<EstimateReport, EstimateError> {
    let start = Instant::now();
    if b.dim() != ds.dim() {
        return Err(EstimateError::DimensionMismatch { expected: ds.dim(), found: b.dim() });
    }
    let u = transformed(ds, t)?;
    let s = split(ds, &u)?;
    let inner = if direct {
        ustat::projection_inner_sums_direct(&s.control, &s.treated, ds.dim(), b)
    } else {
        ustat::projection_inner_sums(&s.control, &s.treated, ds.dim(), b)
    };
    let config = serde_json::json!({ "family": b.family(), "count": b.len() });
    finish(ds, &s, &inner, EstimatorKind::Projection, t.name(), config, start)
}

/// Hájek-normalized inverse-propensity weighting with a logistic propensity
/// model on the raw covariates.
pub fn estimate_ipw_logistic(ds: &Dataset) -> Result<EstimateReport, EstimateError> {
    let start = Instant::now();
    ds.check_estimable()?;
    let fit = fit_logistic(ds.covariates(), ds.dim(), ds.treatment())?;
    let s = split(ds, ds.covariates())?;
    // Odds π/(1-π) = exp(η); shift by the largest control η to avoid overflow.
    let etas: Vec<f64> = s.control.chunks_exact(ds.dim()).map(|x| fit.linear_predictor(x)).collect();
    let top = etas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let inner: Vec<f64> = etas.iter().map(|e| (e - top).exp()).collect();
    let config = serde_json::json!({
        "coefficients": fit.coefficients,
        "std_errors": fit.std_errors,
        "iterations": fit.iterations,
    });
    finish(ds, &s, &inner, EstimatorKind::IpwLogistic, "identity", config, start)
}

/// Writes `row,Z,w` for every input row. With `clip`, negative control
/// weights are set to 0 and the rest renormalized to sum to 1.
pub fn export_weights(report: &EstimateReport, path: impl AsRef<Path>, clip: bool) -> Result<(), EstimateError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_weights(report, &mut file, clip)?;
    file.flush()?;
    Ok(())
}

pub fn write_weights<W: Write>(report: &EstimateReport, w: &mut W, clip: bool) -> Result<(), EstimateError> {
    if report.weights.len() != report.treatment.len() || report.weights.is_empty() {
        return Err(EstimateError::NoWeights);
    }
    let weights = if clip { clipped_weights(report) } else { report.weights.clone() };
    writeln!(w, "row,Z,w")?;
    for (i, (&z, &wt)) in report.treatment.iter().zip(&weights).enumerate() {
        writeln!(w, "{i},{z},{wt}")?;
    }
    Ok(())
}

/// Control weights with negatives set to 0, renormalized; treated stay at 1.
pub fn clipped_weights(report: &EstimateReport) -> Vec<f64> {
    let total = summation::sum(
        report.weights.iter().zip(&report.treatment).filter(|(_, &z)| z == 0).map(|(&w, _)| w.max(0.0)),
    );
    report
        .weights
        .iter()
        .zip(&report.treatment)
        .map(|(&w, &z)| if z == 1 { 1.0 } else if total > 0.0 { w.max(0.0) / total } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{BasisFamily, KernelOrder};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(rng: &mut ChaCha8Rng, n0: usize, n1: usize, dim: usize) -> Dataset {
        let n = n0 + n1;
        let cov: Vec<f64> = (0..n * dim).map(|_| rng.random::<f64>()).collect();
        let z: Vec<u8> = (0..n).map(|i| u8::from(i >= n0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        Dataset::from_parts(cov, dim, z, Some(y)).unwrap()
    }

    /// Pairwise oracle written directly from the ratio definition.
    fn oracle(ds: &Dataset, u: &[f64], k: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
        let d = ds.dim();
        let y = ds.outcome().unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..ds.len() {
            if ds.is_treated(i) {
                continue;
            }
            for j in 0..ds.len() {
                if !ds.is_treated(j) {
                    continue;
                }
                let kv = k(&u[i * d..(i + 1) * d], &u[j * d..(j + 1) * d]);
                num += y[i] * kv;
                den += kv;
            }
        }
        num / den
    }

    fn control_mean(ds: &Dataset) -> f64 {
        let y = ds.outcome().unwrap();
        let c: Vec<f64> = (0..ds.len()).filter(|&i| !ds.is_treated(i)).map(|i| y[i]).collect();
        c.iter().sum::<f64>() / c.len() as f64
    }

    #[test]
    fn kernel_matches_brute_force_on_six_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ds = random_dataset(&mut rng, 3, 3, 1);
        let t = UniformTransformer::identity(1);
        let k = ProductKernel::isotropic(KernelOrder::Two, 0.8, 1).unwrap();
        let r = estimate_kernel(&ds, &t, &k).unwrap();
        let expect = oracle(&ds, ds.covariates(), |a, b| {
            let x = (a[0] - b[0]) / 0.8;
            if x.abs() <= 1.0 { 0.75 * (1.0 - x * x) / 0.8 } else { 0.0 }
        });
        assert!((r.mu_ct_hat - expect).abs() <= 1e-12 * expect.abs().max(1.0));
    }

    #[test]
    fn projection_matches_brute_force_on_six_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ds = random_dataset(&mut rng, 3, 3, 1);
        let t = UniformTransformer::identity(1);
        let b = ProjectionBasis::new(BasisFamily::Cosine, 1, 3).unwrap();
        let r = estimate_projection(&ds, &t, &b).unwrap();
        let expect = oracle(&ds, ds.covariates(), |a, b| {
            let pi = std::f64::consts::PI;
            1.0 + 2.0 * (pi * a[0]).cos() * (pi * b[0]).cos() + 2.0 * (2.0 * pi * a[0]).cos() * (2.0 * pi * b[0]).cos()
        });
        assert!((r.mu_ct_hat - expect).abs() <= 1e-12 * expect.abs().max(1.0));
    }

    #[test]
    fn factored_and_direct_projection_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in 1..=3 {
            let ds = random_dataset(&mut rng, 40, 25, dim);
            let t = UniformTransformer::identity(dim);
            for family in [BasisFamily::Cosine, BasisFamily::Haar] {
                let b = ProjectionBasis::new(family, dim, 17).unwrap();
                let a = estimate_projection(&ds, &t, &b).unwrap().mu_ct_hat;
                let c = estimate_projection_direct(&ds, &t, &b).unwrap().mu_ct_hat;
                assert!((a - c).abs() <= 1e-10 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn wide_bandwidth_gives_control_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ds = random_dataset(&mut rng, 12, 9, 1);
        let t = UniformTransformer::identity(1);
        // At this width every pair's kernel value rounds to the same constant.
        let h = 1e7;
        let k = ProductKernel::isotropic(KernelOrder::Two, h, 1).unwrap();
        let r = estimate_kernel(&ds, &t, &k).unwrap();
        let m = control_mean(&ds);
        assert!((r.mu_ct_hat - m).abs() <= 1e-12 * m.abs().max(1.0));
    }

    #[test]
    fn constant_basis_gives_control_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ds = random_dataset(&mut rng, 15, 7, 2);
        let b = ProjectionBasis::new(BasisFamily::Cosine, 2, 1).unwrap();
        let r = estimate_projection(&ds, &UniformTransformer::identity(2), &b).unwrap();
        let m = control_mean(&ds);
        assert!((r.mu_ct_hat - m).abs() <= 1e-12 * m.abs().max(1.0));
    }

    #[test]
    fn report_weights_and_att_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ds = random_dataset(&mut rng, 30, 20, 2);
        let k = ProductKernel::isotropic(KernelOrder::Two, 0.5, 2).unwrap();
        let r = estimate_kernel(&ds, &UniformTransformer::identity(2), &k).unwrap();
        assert!(!r.has_negative_weights());
        assert!((r.control_weight_sum() - 1.0).abs() < 1e-10);
        for (i, &w) in r.weights.iter().enumerate() {
            if ds.is_treated(i) {
                assert_eq!(w, 1.0);
            }
        }
        let y = ds.outcome().unwrap();
        let mu_tt = (0..ds.len()).filter(|&i| ds.is_treated(i)).map(|i| y[i]).sum::<f64>() / 20.0;
        assert!((r.tau_att_hat - (mu_tt - r.mu_ct_hat)).abs() < 1e-12);
        let weighted: f64 = (0..ds.len()).filter(|&i| !ds.is_treated(i)).map(|i| r.weights[i] * y[i]).sum();
        assert!((weighted - r.mu_ct_hat).abs() < 1e-12);
    }

    #[test]
    fn overlap_failure_is_reported() {
        // Controls near 0, treated near 1: no pair within h.
        let cov = vec![0.0, 0.05, 0.1, 0.9, 0.95, 1.0];
        let ds = Dataset::from_parts(cov, 1, vec![0, 0, 0, 1, 1, 1], Some(vec![1.0; 6])).unwrap();
        let k = ProductKernel::isotropic(KernelOrder::Two, 0.1, 1).unwrap();
        let err = estimate_kernel(&ds, &UniformTransformer::identity(1), &k).unwrap_err();
        assert!(matches!(err, EstimateError::Overlap { .. }));
    }

    #[test]
    fn order_four_kernel_yields_negative_weights() {
        // A control sitting about 1.8h from the treated cluster falls where
        // the fourth-order kernel is negative.
        let cov = vec![0.5, 0.5 + 0.18, 0.52, 0.49, 0.5, 0.51];
        let ds = Dataset::from_parts(cov, 1, vec![0, 0, 0, 1, 1, 1], Some(vec![1.0, 2.0, 3.0, 0.0, 0.0, 0.0])).unwrap();
        let k = ProductKernel::isotropic(KernelOrder::Four, 0.1, 1).unwrap();
        let r = estimate_kernel(&ds, &UniformTransformer::identity(1), &k).unwrap();
        assert!(r.weights[1] < 0.0);
        assert!((r.control_weight_sum() - 1.0).abs() < 1e-12);

        let mut raw = Vec::new();
        write_weights(&r, &mut raw, false).unwrap();
        let text = String::from_utf8(raw).unwrap();
        let second: f64 = text.lines().nth(2).unwrap().split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(second, r.weights[1]);

        let clipped = clipped_weights(&r);
        assert_eq!(clipped[1], 0.0);
        assert!(clipped.iter().all(|&w| w >= 0.0));
        assert!((clipped[0] + clipped[2] - 1.0).abs() < 1e-12);
        assert_eq!(&clipped[3..], &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn export_writes_every_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ds = random_dataset(&mut rng, 5, 4, 1);
        let k = ProductKernel::isotropic(KernelOrder::Two, 1.0, 1).unwrap();
        let r = estimate_kernel(&ds, &UniformTransformer::identity(1), &k).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        export_weights(&r, &path, false).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "row,Z,w");
        assert_eq!(lines.len(), 10);
        for (i, line) in lines[1..].iter().enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f[0], i.to_string());
            assert_eq!(f[1], ds.treatment()[i].to_string());
            if ds.is_treated(i) {
                assert_eq!(f[2], "1");
            }
        }
    }

    #[test]
    fn kernel_result_is_identical_across_thread_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let ds = random_dataset(&mut rng, 300, 200, 3);
        let k = ProductKernel::isotropic(KernelOrder::Four, 0.4, 3).unwrap();
        let b = ProjectionBasis::new(BasisFamily::Cosine, 3, 64).unwrap();
        let t = UniformTransformer::fit_adaptive(&ds, 0.01).unwrap();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let a = estimate_kernel(&ds, &t, &k).unwrap();
                let p = estimate_projection(&ds, &t, &b).unwrap();
                (a.mu_ct_hat.to_bits(), p.mu_ct_hat.to_bits(), a.weights, p.weights)
            })
        };
        let one = run(1);
        for threads in [2, 4] {
            assert_eq!(one, run(threads));
        }
    }

    #[test]
    fn ipw_constant_propensity_gives_control_mean() {
        // Treatment alternates along a symmetric design: the MLE slope is 0.
        let cov = vec![-1.0, -1.0, 1.0, 1.0, -2.0, -2.0, 2.0, 2.0];
        let z = vec![0, 1, 0, 1, 0, 1, 0, 1];
        let y = vec![1.0, 0.0, 2.0, 0.0, 3.0, 0.0, 6.0, 0.0];
        let ds = Dataset::from_parts(cov, 1, z, Some(y)).unwrap();
        let r = estimate_ipw_logistic(&ds).unwrap();
        assert!((r.mu_ct_hat - 3.0).abs() < 1e-10);
        for i in [0, 2, 4, 6] {
            assert!((r.weights[i] - 0.25).abs() < 1e-10);
        }
    }

    #[test]
    fn logistic_recovers_truth_within_three_se() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 20_000;
        let (a, b) = (-0.4, 1.3);
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let z: Vec<u8> = x.iter().map(|&v| u8::from(rng.random::<f64>() < ipw::sigmoid(a + b * v))).collect();
        let fit = fit_logistic(&x, 1, &z).unwrap();
        assert!((fit.coefficients[0] - a).abs() < 3.0 * fit.std_errors[0]);
        assert!((fit.coefficients[1] - b).abs() < 3.0 * fit.std_errors[1]);
    }

    #[test]
    fn logistic_separation_is_reported() {
        let x = vec![0.0, 0.1, 0.2, 0.8, 0.9, 1.0];
        let z = vec![0, 0, 0, 1, 1, 1];
        let err = fit_logistic(&x, 1, &z).unwrap_err();
        assert!(matches!(err, EstimateError::Separation | EstimateError::NonConvergence { .. }));
    }

    fn shuffled(ds: &Dataset, perm: &[usize]) -> Dataset {
        let d = ds.dim();
        let y = ds.outcome().unwrap();
        let cov: Vec<f64> = perm.iter().flat_map(|&i| ds.row(i).to_vec()).collect();
        let z: Vec<u8> = perm.iter().map(|&i| ds.treatment()[i]).collect();
        let yy: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        Dataset::from_parts(cov, d, z, Some(yy)).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn permutation_invariance(seed in any::<u64>(), n0 in 4usize..30, n1 in 4usize..30, dim in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ds = random_dataset(&mut rng, n0, n1, dim);
            let mut perm: Vec<usize> = (0..ds.len()).collect();
            for i in (1..perm.len()).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            let other = shuffled(&ds, &perm);
            let k = ProductKernel::isotropic(KernelOrder::Two, 0.9, dim).unwrap();
            let b = ProjectionBasis::new(BasisFamily::Cosine, dim, 5).unwrap();
            let t1 = UniformTransformer::fit_adaptive(&ds, 0.01).unwrap();
            let t2 = UniformTransformer::fit_adaptive(&other, 0.01).unwrap();
            let a = estimate_kernel(&ds, &t1, &k).unwrap().mu_ct_hat;
            let c = estimate_kernel(&other, &t2, &k).unwrap().mu_ct_hat;
            prop_assert!((a - c).abs() <= 1e-10 * a.abs().max(1.0));
            let a = estimate_projection(&ds, &t1, &b).unwrap().mu_ct_hat;
            let c = estimate_projection(&other, &t2, &b).unwrap().mu_ct_hat;
            prop_assert!((a - c).abs() <= 1e-10 * a.abs().max(1.0));
        }

        #[test]
        fn location_scale_equivariance(seed in any::<u64>(), shift in -50.0f64..50.0, scale in 0.1f64..20.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ds = random_dataset(&mut rng, 20, 15, 2);
            let t = UniformTransformer::fit_marginal(&ds, 0.01).unwrap();
            let k = ProductKernel::isotropic(KernelOrder::Two, 0.7, 2).unwrap();
            let b = ProjectionBasis::new(BasisFamily::Cosine, 2, 6).unwrap();
            let y2: Vec<f64> = ds.outcome().unwrap().iter().map(|&v| shift + scale * v).collect();
            let ds2 = ds.with_outcome(y2).unwrap();
            for (base, moved) in [
                (estimate_kernel(&ds, &t, &k).unwrap(), estimate_kernel(&ds2, &t, &k).unwrap()),
                (estimate_projection(&ds, &t, &b).unwrap(), estimate_projection(&ds2, &t, &b).unwrap()),
            ] {
                let want = shift + scale * base.mu_ct_hat;
                prop_assert!((moved.mu_ct_hat - want).abs() <= 1e-10 * want.abs().max(1.0));
                prop_assert!((moved.tau_att_hat - scale * base.tau_att_hat).abs() <= 1e-10 * (scale * base.tau_att_hat).abs().max(1.0));
            }
        }

        #[test]
        fn nonnegative_weights_sum_to_one(seed in any::<u64>(), h in 0.3f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ds = random_dataset(&mut rng, 25, 10, 2);
            let k = ProductKernel::isotropic(KernelOrder::Two, h, 2).unwrap();
            if let Ok(r) = estimate_kernel(&ds, &UniformTransformer::identity(2), &k) {
                prop_assert!(!r.has_negative_weights());
                prop_assert!((r.control_weight_sum() - 1.0).abs() < 1e-10);
            }
        }
    }
}
