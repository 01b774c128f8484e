//! Smoothing operators for the treated density on the transformed scale:
//! higher-order product kernels `K_H` and projection kernels `K_L`, plus the
//! default tuning rules for `h` and `L`.

mod basis;
mod kernel;

use thiserror::Error;

pub use basis::{BasisFamily, ProjectionBasis};
pub use kernel::{KernelOrder, ProductKernel};

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("bandwidth must be positive and finite, got {0}")]
    NonPositiveBandwidth(f64),
    #[error("kernel order {0} not supported (use 2, 4 or 6)")]
    UnsupportedOrder(u8),
    #[error("projection basis needs at least one function")]
    EmptyBasis,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid tuning input: {0}")]
    InvalidTuning(String),
}

fn check_tuning(n: usize, dim: usize, alpha: f64, beta: f64, c: f64) -> Result<(), DensityError> {
    if n < 2 || dim < 1 {
        return Err(DensityError::InvalidTuning(format!("need n >= 2 and d >= 1, got n={n}, d={dim}")));
    }
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(DensityError::InvalidTuning(format!("smoothness must be positive, got α={alpha}, β={beta}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(DensityError::InvalidTuning(format!("scale must be positive, got {c}")));
    }
    Ok(())
}

/// Rate-optimal bandwidth `h = c · n^{-2/(d + 2(α+β))}`.
///
/// As `α+β → ∞` the rule tends to the constant `c`; see
/// [`smoothness_is_degenerate`].
pub fn default_bandwidth(n: usize, dim: usize, alpha: f64, beta: f64, c: f64) -> Result<f64, DensityError> {
    check_tuning(n, dim, alpha, beta, c)?;
    let s = alpha + beta;
    Ok(c * (n as f64).powf(-2.0 / (dim as f64 + 2.0 * s)))
}

/// `L = max(1, round(c · n^{2d/(d + 2(α+β))}))`.
pub fn default_basis_count(n: usize, dim: usize, alpha: f64, beta: f64, c: f64) -> Result<usize, DensityError> {
    check_tuning(n, dim, alpha, beta, c)?;
    let s = alpha + beta;
    let d = dim as f64;
    let l = (c * (n as f64).powf(2.0 * d / (d + 2.0 * s))).round();
    Ok(if l.is_finite() { (l as usize).max(1) } else { usize::MAX })
}

/// True when the smoothness is infinite and the tuning rules no longer shrink
/// with `n`.
pub fn smoothness_is_degenerate(alpha: f64, beta: f64) -> bool {
    (alpha + beta).is_infinite()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandwidth_rule_values() {
        let h = default_bandwidth(100, 1, 0.25, 0.25, 1.0).unwrap();
        assert!((h - 0.01).abs() < 1e-15);
        // Warm-up form n^{-2/(1+2(α+β))} for d = 1.
        let h = default_bandwidth(4000, 1, 0.2, 0.1, 1.0).unwrap();
        assert!((h - 4000f64.powf(-2.0 / 1.6)).abs() < 1e-15);
        let h = default_bandwidth(1500, 5, 1.0, 1.0, 1.0).unwrap();
        assert!((h - 1500f64.powf(-2.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn bandwidth_degenerates_to_scale() {
        let h = default_bandwidth(1000, 3, f64::INFINITY, 1.0, 0.7).unwrap();
        assert_eq!(h, 0.7);
        assert!(smoothness_is_degenerate(f64::INFINITY, 1.0));
        assert!(!smoothness_is_degenerate(1.0, 1.0));
    }

    #[test]
    fn basis_count_rule_values() {
        assert_eq!(default_basis_count(100, 1, 0.25, 0.25, 1.0).unwrap(), 100);
        assert_eq!(default_basis_count(10_000, 4, 1.0, 1.0, 1.0).unwrap(), 10_000);
        assert_eq!(default_basis_count(100, 1, 0.25, 0.25, 1e-6).unwrap(), 1);
    }

    #[test]
    fn tuning_rejects_bad_inputs() {
        assert!(default_bandwidth(1, 1, 1.0, 1.0, 1.0).is_err());
        assert!(default_bandwidth(10, 1, 0.0, 1.0, 1.0).is_err());
        assert!(default_basis_count(10, 1, 1.0, 1.0, -1.0).is_err());
    }
}
