use serde::{Deserialize, Serialize};

use super::DensityError;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Order of the univariate kernel `G`: all moments `1..order-1` vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum KernelOrder {
    /// Epanechnikov, `G(x) = 3/4 (1 - x²)` on `[-1, 1]`.
    Two,
    /// `G(x) = (3 - x²) φ(x) / 2`.
    Four,
    /// `G(x) = (15 - 10x² + x⁴) φ(x) / 8`.
    Six,
}

impl KernelOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            KernelOrder::Two => 2,
            KernelOrder::Four => 4,
            KernelOrder::Six => 6,
        }
    }

    /// Half-width of the support, infinite for the Gaussian-based kernels.
    pub fn support_radius(self) -> f64 {
        match self {
            KernelOrder::Two => 1.0,
            _ => f64::INFINITY,
        }
    }

    #[inline]
    pub fn univariate(self, x: f64) -> f64 {
        match self {
            KernelOrder::Two => {
                if x.abs() < 1.0 {
                    0.75 * (1.0 - x * x)
                } else {
                    0.0
                }
            }
            KernelOrder::Four => {
                let x2 = x * x;
                0.5 * (3.0 - x2) * INV_SQRT_2PI * (-0.5 * x2).exp()
            }
            KernelOrder::Six => {
                let x2 = x * x;
                0.125 * (15.0 - 10.0 * x2 + x2 * x2) * INV_SQRT_2PI * (-0.5 * x2).exp()
            }
        }
    }
}

impl TryFrom<u8> for KernelOrder {
    type Error = DensityError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            2 => Ok(KernelOrder::Two),
            4 => Ok(KernelOrder::Four),
            6 => Ok(KernelOrder::Six),
            other => Err(DensityError::UnsupportedOrder(other)),
        }
    }
}

impl From<KernelOrder> for u8 {
    fn from(o: KernelOrder) -> u8 {
        o.as_u8()
    }
}

/// Product kernel `K_H(u) = det(H)^{-1} ∏_k G(u_k / h_k)` with diagonal `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductKernel {
    order: KernelOrder,
    bandwidths: Vec<f64>,
}

impl ProductKernel {
    pub fn new(order: KernelOrder, bandwidths: Vec<f64>) -> Result<Self, DensityError> {
        if bandwidths.is_empty() {
            return Err(DensityError::DimensionMismatch { expected: 1, found: 0 });
        }
        if let Some(&h) = bandwidths.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(DensityError::NonPositiveBandwidth(h));
        }
        Ok(Self { order, bandwidths })
    }

    pub fn isotropic(order: KernelOrder, h: f64, dim: usize) -> Result<Self, DensityError> {
        Self::new(order, vec![h; dim])
    }

    pub fn order(&self) -> KernelOrder {
        self.order
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn dim(&self) -> usize {
        self.bandwidths.len()
    }

    /// `K_H(u - v)`.
    pub fn eval(&self, u: &[f64], v: &[f64]) -> Result<f64, DensityError> {
        if u.len() != self.dim() || v.len() != self.dim() {
            return Err(DensityError::DimensionMismatch { expected: self.dim(), found: u.len().max(v.len()) });
        }
        Ok(self.eval_unchecked(u, v))
    }

    /// Evaluation without dimension checks. Stops early once a factor is zero.
    #[inline]
    pub fn eval_unchecked(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut acc = 1.0;
        for ((&a, &b), &h) in u.iter().zip(v).zip(&self.bandwidths) {
            let g = self.order.univariate((a - b) / h);
            if g == 0.0 {
                return 0.0;
            }
            acc *= g / h;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    fn moment(order: KernelOrder, t: i32) -> f64 {
        let r = order.support_radius().min(12.0);
        simpson(|x| x.powi(t) * order.univariate(x), -r, r, 20_000)
    }

    #[test]
    fn moment_conditions_hold_by_quadrature() {
        for order in [KernelOrder::Two, KernelOrder::Four, KernelOrder::Six] {
            let r = order.as_u8() as i32;
            assert!((moment(order, 0) - 1.0).abs() < 1e-8, "{order:?} mass");
            for t in 1..r {
                assert!(moment(order, t).abs() < 1e-8, "{order:?} moment {t} = {}", moment(order, t));
            }
            assert!(moment(order, r).abs() > 1e-3, "{order:?} order-{r} moment should not vanish");
        }
    }

    #[test]
    fn coincident_points_give_g0_power() {
        let k = ProductKernel::isotropic(KernelOrder::Four, 1.0, 3).unwrap();
        let g0 = KernelOrder::Four.univariate(0.0);
        let v = k.eval(&[0.3, 0.1, 0.7], &[0.3, 0.1, 0.7]).unwrap();
        assert!((v - g0.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_scaling() {
        let k = ProductKernel::isotropic(KernelOrder::Two, 0.5, 1).unwrap();
        let v = k.eval(&[0.75], &[0.25]).unwrap();
        assert_eq!(v, KernelOrder::Two.univariate(1.0) / 0.5);
        let k = ProductKernel::isotropic(KernelOrder::Six, 0.5, 1).unwrap();
        let v = k.eval(&[0.75], &[0.25]).unwrap();
        assert!((v - KernelOrder::Six.univariate(1.0) / 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_bandwidth_and_order() {
        assert!(matches!(
            ProductKernel::new(KernelOrder::Two, vec![0.1, 0.0]),
            Err(DensityError::NonPositiveBandwidth(_))
        ));
        assert!(ProductKernel::new(KernelOrder::Two, vec![-1.0]).is_err());
        assert!(KernelOrder::try_from(3).is_err());
    }

    #[test]
    fn symmetric_and_scaling_identity() {
        let mut state = 17u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for order in [KernelOrder::Two, KernelOrder::Four, KernelOrder::Six] {
            for _ in 0..200 {
                let h = 0.05 + next();
                let k = ProductKernel::isotropic(order, h, 2).unwrap();
                let u = [next(), next()];
                let v = [next(), next()];
                assert_eq!(k.eval(&u, &v).unwrap(), k.eval(&v, &u).unwrap());
                let direct = order.univariate((u[0] - v[0]) / h) * order.univariate((u[1] - v[1]) / h) / (h * h);
                let got = k.eval(&u, &v).unwrap();
                assert!((got - direct).abs() <= 1e-12 * direct.abs().max(1e-300), "{got} vs {direct}");
            }
        }
    }
}
