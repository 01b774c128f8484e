//! Logistic-regression propensity score fitted by Newton–Raphson.

use nalgebra::{DMatrix, DVector};

use super::EstimateError;

pub const MAX_ITERATIONS: usize = 100;
pub const TOLERANCE: f64 = 1e-10;

/// Fitted logistic model on the original covariate scale.
#[derive(Debug, Clone)]
pub struct LogisticFit {
    /// Intercept followed by one slope per covariate.
    pub coefficients: Vec<f64>,
    /// Standard errors from the inverse observed information.
    pub std_errors: Vec<f64>,
    pub iterations: usize,
}

impl LogisticFit {
    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        self.coefficients[0] + self.coefficients[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }
}

fn log_likelihood(design: &DMatrix<f64>, z: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let eta = design * beta;
    eta.iter().zip(z.iter()).map(|(&e, &zi)| zi * e - softplus(e)).sum()
}

#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Maximum-likelihood logistic regression of `z` on row-major `x` with an
/// intercept. Covariates are standardized internally; coefficients are
/// reported on the original scale.
pub fn fit_logistic(x: &[f64], dim: usize, z: &[u8]) -> Result<LogisticFit, EstimateError> {
    let n = z.len();
    let p = dim + 1;
    let mut means = vec![0.0; dim];
    let mut sds = vec![0.0; dim];
    for k in 0..dim {
        let col = x.chunks_exact(dim).map(|r| r[k]);
        means[k] = col.clone().sum::<f64>() / n as f64;
        let var = col.map(|v| (v - means[k]).powi(2)).sum::<f64>() / n as f64;
        sds[k] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    let design = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { (x[i * dim + j - 1] - means[j - 1]) / sds[j - 1] });
    let zv = DVector::from_iterator(n, z.iter().map(|&v| f64::from(v)));

    let mut beta = DVector::zeros(p);
    let mut ll = log_likelihood(&design, &zv, &beta);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let eta = &design * &beta;
        let probs = eta.map(sigmoid);
        let grad = design.transpose() * (&zv - &probs);
        let w = probs.map(|q| q * (1.0 - q));
        let hess = design.transpose() * DMatrix::from_diagonal(&w) * &design;
        let chol = hess.cholesky().ok_or(EstimateError::Separation)?;
        let step = chol.solve(&grad);
        if !step.iter().all(|s| s.is_finite()) {
            return Err(EstimateError::Separation);
        }
        let mut scale = 1.0;
        let mut candidate = &beta + &step;
        let mut cand_ll = log_likelihood(&design, &zv, &candidate);
        let mut halvings = 0;
        while cand_ll < ll - 1e-12 * ll.abs().max(1.0) && halvings < 30 {
            scale *= 0.5;
            candidate = &beta + &step * scale;
            cand_ll = log_likelihood(&design, &zv, &candidate);
            halvings += 1;
        }
        let max_change = (&step * scale).amax();
        beta = candidate;
        ll = cand_ll;
        if max_change < TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(EstimateError::NonConvergence { iterations });
    }

    let eta = &design * &beta;
    let w = eta.map(|e| {
        let q = sigmoid(e);
        q * (1.0 - q)
    });
    let hess = design.transpose() * DMatrix::from_diagonal(&w) * &design;
    let cov = hess.try_inverse().ok_or(EstimateError::Separation)?;

    // Back to the original scale: slope_k = b_k / sd_k,
    // intercept = b_0 - Σ b_k mean_k / sd_k.
    let mut coefficients = vec![0.0; p];
    let mut transform = DMatrix::zeros(p, p);
    transform[(0, 0)] = 1.0;
    for k in 0..dim {
        coefficients[k + 1] = beta[k + 1] / sds[k];
        transform[(k + 1, k + 1)] = 1.0 / sds[k];
        transform[(0, k + 1)] = -means[k] / sds[k];
    }
    coefficients[0] = beta[0] - (0..dim).map(|k| beta[k + 1] * means[k] / sds[k]).sum::<f64>();
    let cov_orig = &transform * cov * transform.transpose();
    let std_errors = (0..p).map(|j| cov_orig[(j, j)].max(0.0).sqrt()).collect();
    Ok(LogisticFit { coefficients, std_errors, iterations })
}
