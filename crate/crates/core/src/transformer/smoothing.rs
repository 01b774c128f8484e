use serde::{Deserialize, Serialize};

/// Smoothing density `S` on `[-0.5, 0.5]` used inside each partition interval.
///
/// `S` vanishes at both ends, is positive inside and integrates to one, so
/// its antiderivative `T_S` climbs from 0 to 1 across an interval and the
/// adaptive map is continuous across breakpoints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothingKernel {
    /// `S(u) = (15/8)(1 - 4u²)²`.
    #[default]
    Quartic,
}

impl SmoothingKernel {
    pub fn density(&self, u: f64) -> f64 {
        match self {
            SmoothingKernel::Quartic => {
                if u.abs() >= 0.5 {
                    0.0
                } else {
                    let a = 1.0 - 4.0 * u * u;
                    1.875 * a * a
                }
            }
        }
    }

    /// `T_S(u) = ∫_{-0.5}^{u} S`, clamped to `[0, 1]` outside the support.
    pub fn cdf(&self, u: f64) -> f64 {
        match self {
            SmoothingKernel::Quartic => {
                if u <= -0.5 {
                    0.0
                } else if u >= 0.5 {
                    1.0
                } else {
                    let t = 2.0 * u;
                    let t2 = t * t;
                    let v = 0.5 + 0.9375 * t * (1.0 - t2 * (2.0 / 3.0) + t2 * t2 * 0.2);
                    v.clamp(0.0, 1.0)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        acc * h / 3.0
    }

    #[test]
    fn boundary_conditions() {
        let s = SmoothingKernel::Quartic;
        assert_eq!(s.density(-0.5), 0.0);
        assert_eq!(s.density(0.5), 0.0);
        assert_eq!(s.cdf(-0.5), 0.0);
        assert_eq!(s.cdf(0.5), 1.0);
        assert_eq!(s.cdf(0.0), 0.5);
        for i in 1..100 {
            let u = -0.5 + i as f64 / 100.0;
            assert!(s.density(u) > 0.0);
        }
    }

    #[test]
    fn cdf_matches_quadrature_of_density() {
        let s = SmoothingKernel::Quartic;
        for i in 0..=20 {
            let u = -0.5 + i as f64 / 20.0;
            let q = simpson(|x| s.density(x), -0.5, u, 2000);
            assert!((q - s.cdf(u)).abs() < 1e-12, "u={u}: {q} vs {}", s.cdf(u));
        }
    }

    #[test]
    fn cdf_strictly_increasing() {
        let s = SmoothingKernel::Quartic;
        let mut prev = s.cdf(-0.5);
        for i in 1..=1000 {
            let v = s.cdf(-0.5 + i as f64 / 1000.0);
            assert!(v > prev);
            prev = v;
        }
    }
}
