//! Outcome models Y1–Y4.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::rng::{stream_rng, NormalSource};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

/// Covariate dimension of the Y1/Y2 designs.
pub const Y12_DIM: usize = 5;
/// Covariate dimension of the Y3/Y4 designs.
pub const Y34_DIM: usize = 4;

const STREAM_TREATED: u64 = 0;
const STREAM_CONTROL: u64 = 1;
const STREAM_POOL: u64 = 2;
const STREAM_MC: u64 = 3;
/// Y3/Y4 attempt `k` draws from stream `STREAM_KS + k`.
const STREAM_KS: u64 = 16;
const MAX_ATTEMPTS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelId {
    Y1,
    Y2,
    Y3,
    Y4,
}

impl ModelId {
    pub fn is_correlated_design(self) -> bool {
        matches!(self, ModelId::Y1 | ModelId::Y2)
    }

    pub fn dim(self) -> usize {
        if self.is_correlated_design() {
            Y12_DIM
        } else {
            Y34_DIM
        }
    }
}

impl std::str::FromStr for ModelId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "y1" => Ok(ModelId::Y1),
            "y2" => Ok(ModelId::Y2),
            "y3" => Ok(ModelId::Y3),
            "y4" => Ok(ModelId::Y4),
            other => Err(format!("unknown model '{other}' (y1, y2, y3, y4)")),
        }
    }
}

impl std::fmt::Display for ModelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelId::Y1 => "y1",
            ModelId::Y2 => "y2",
            ModelId::Y3 => "y3",
            ModelId::Y4 => "y4",
        };
        f.write_str(s)
    }
}

/// A simulation design with its sample sizes.
///
/// Y1/Y2 use `n_treated`, `n_control` and `n_unlabeled`; Y3/Y4 use `n` and
/// draw treatment from the propensity model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimModel {
    pub id: ModelId,
    pub rho: f64,
    pub n_treated: usize,
    pub n_control: usize,
    pub n_unlabeled: usize,
    pub n: usize,
}

impl SimModel {
    pub fn y1_y2(id: ModelId, rho: f64, n_treated: usize, n_control: usize, n_unlabeled: usize) -> Result<Self> {
        let m = Self { id, rho, n_treated, n_control, n_unlabeled, n: n_treated + n_control };
        m.validate()?;
        Ok(m)
    }

    pub fn y3_y4(id: ModelId, n: usize) -> Result<Self> {
        let m = Self { id, rho: 0.0, n_treated: 0, n_control: 0, n_unlabeled: 0, n };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_correlated_design() {
            if !(0.0..1.0).contains(&self.rho) {
                return Err(Error::Config(format!("rho must lie in [0, 1), got {}", self.rho)));
            }
            if self.n_treated < 1 || self.n_control < 1 || self.n_treated + self.n_control < 2 {
                return Err(Error::Config("treated and control sizes must be positive".into()));
            }
            if self.n_unlabeled == 1 {
                return Err(Error::Config("an unlabeled pool needs at least 2 rows".into()));
            }
        } else if self.n < 10 {
            return Err(Error::Config(format!("n must be at least 10, got {}", self.n)));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.id.dim()
    }

    pub fn has_pool(&self) -> bool {
        self.id.is_correlated_design() && self.n_unlabeled >= 2
    }
}

/// Labeled data plus an optional unlabeled control pool.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDraw {
    pub labeled: Dataset,
    pub pool: Option<Dataset>,
    /// Y3/Y4 only: draws needed before both groups were non-empty.
    pub attempts: u32,
}

/// Lower Cholesky factor of `Σ_ij = ρ^{|i-j|}`.
fn ar1_cholesky(rho: f64, dim: usize) -> DMatrix<f64> {
    let sigma = DMatrix::from_fn(dim, dim, |i, j| rho.powi((i as i32 - j as i32).abs()));
    sigma.cholesky().expect("AR(1) covariance is positive definite for |rho| < 1").l()
}

fn correlated_normal<R: rand::Rng>(src: &mut NormalSource<R>, chol: &DMatrix<f64>, mean: f64, out: &mut [f64]) {
    let dim = out.len();
    let mut z = [0.0; Y12_DIM];
    for zk in z.iter_mut().take(dim) {
        *zk = src.normal();
    }
    for i in 0..dim {
        let mut acc = mean;
        for j in 0..=i {
            acc += chol[(i, j)] * z[j];
        }
        out[i] = acc;
    }
}

/// Y1 response surface without noise.
pub fn y1_surface(w: &[f64]) -> f64 {
    w[0] * w[0] * w[1] * w[1] - 2.0 * w[2] * w[2] * w[3] * w[3] + w.iter().sum::<f64>()
}

/// Y2 response surface without noise.
pub fn y2_surface(w: &[f64]) -> f64 {
    10.0 * (w[0] + w[1] + w[2])
        + 100.0 * (2.0 * PI * w[0]).sin() * (2.0 * PI * w[1]).sin()
        + 100.0 * (PI * w[2] / 2.0).cos() * (PI * w[3] / 2.0).cos() * (PI * w[4] / 2.0).cos()
}

/// Y3 response surface without noise.
pub fn y3_surface(w: &[f64]) -> f64 {
    210.0 + 27.4 * w[0] + 13.7 * (w[1] + w[2] + w[3])
}

/// Y4 response surface without noise.
pub fn y4_surface(w: &[f64]) -> f64 {
    (4.0 * w[0] + 2.0 * w[1]) / (w[2].exp() + 4.0 * w[3].abs().sqrt()) + 2.0 * w[2] + w[3]
}

/// Treatment probability of the Y3/Y4 design.
pub fn ks_propensity(w: &[f64]) -> f64 {
    1.0 / (1.0 + (w[0] - 0.5 * w[1] + 0.25 * w[2] + 0.1 * w[3]).exp())
}

/// Observed covariates of the Y3/Y4 design.
pub fn ks_covariates(w: &[f64], out: &mut [f64]) {
    out[0] = (w[0] / 2.0).exp();
    out[1] = w[1] / (1.0 + w[0].exp()) + 10.0;
    out[2] = (w[0] * w[2] / 25.0 + 0.6).powi(3);
    out[3] = (w[1] + w[3] + 20.0).powi(2);
}

fn surface(id: ModelId) -> fn(&[f64]) -> f64 {
    match id {
        ModelId::Y1 => y1_surface,
        ModelId::Y2 => y2_surface,
        ModelId::Y3 => y3_surface,
        ModelId::Y4 => y4_surface,
    }
}

/// `X = exp(W) + W` rows from the AR(1) normal with the given mean. Returns
/// covariates and, when `with_outcome`, noisy outcomes.
fn draw_y12_group(
    id: ModelId,
    chol: &DMatrix<f64>,
    mean: f64,
    n: usize,
    seed: u64,
    stream: u64,
    with_outcome: bool,
) -> (Vec<f64>, Vec<f64>) {
    let mut src = NormalSource::new(stream_rng(seed, stream));
    let f = surface(id);
    let mut cov = Vec::with_capacity(n * Y12_DIM);
    let mut y = Vec::with_capacity(if with_outcome { n } else { 0 });
    let mut w = [0.0; Y12_DIM];
    for _ in 0..n {
        correlated_normal(&mut src, chol, mean, &mut w);
        cov.extend(w.iter().map(|&v| v.exp() + v));
        if with_outcome {
            y.push(f(&w) + src.normal());
        }
    }
    (cov, y)
}

/// Y1/Y2 draw: treated rows first, then controls; the pool (if any) comes
/// from the control law without outcomes.
///
/// Treated, control and pool rows use separate streams, so changing one group
/// size never changes the other groups.
pub fn generate_y1_y2(model: &SimModel, seed: u64) -> Result<SimDraw> {
    model.validate()?;
    if !model.id.is_correlated_design() {
        return Err(Error::Config(format!("{} is not a Y1/Y2 model", model.id)));
    }
    let chol = ar1_cholesky(model.rho, Y12_DIM);
    let (mut cov, mut y) = draw_y12_group(model.id, &chol, 0.5, model.n_treated, seed, STREAM_TREATED, true);
    let (c_cov, c_y) = draw_y12_group(model.id, &chol, 0.0, model.n_control, seed, STREAM_CONTROL, true);
    cov.extend(c_cov);
    y.extend(c_y);
    let mut z = vec![1u8; model.n_treated];
    z.resize(model.n_treated + model.n_control, 0);
    let labeled = Dataset::from_parts(cov, Y12_DIM, z, Some(y))?;
    let pool = if model.has_pool() {
        let (p_cov, _) = draw_y12_group(model.id, &chol, 0.0, model.n_unlabeled, seed, STREAM_POOL, false);
        Some(Dataset::from_parts(p_cov, Y12_DIM, vec![0; model.n_unlabeled], None)?)
    } else {
        None
    };
    Ok(SimDraw { labeled, pool, attempts: 1 })
}

/// Y3/Y4 draw with treatment from the propensity model. A draw in which every
/// unit lands in one group is discarded and redrawn from the next stream;
/// `attempts` records how many draws were made.
pub fn generate_y3_y4(model: &SimModel, seed: u64) -> Result<SimDraw> {
    model.validate()?;
    if model.id.is_correlated_design() {
        return Err(Error::Config(format!("{} is not a Y3/Y4 model", model.id)));
    }
    let f = surface(model.id);
    for attempt in 0..MAX_ATTEMPTS {
        let mut src = NormalSource::new(stream_rng(seed, STREAM_KS + attempt));
        let n = model.n;
        let mut cov = vec![0.0; n * Y34_DIM];
        let mut z = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        let mut w = [0.0; Y34_DIM];
        for i in 0..n {
            for wk in w.iter_mut() {
                *wk = src.normal();
            }
            let u = src.uniform();
            z.push(u8::from(u < ks_propensity(&w)));
            ks_covariates(&w, &mut cov[i * Y34_DIM..(i + 1) * Y34_DIM]);
            y.push(f(&w) + src.normal());
        }
        let n1 = z.iter().filter(|&&v| v == 1).count();
        if n1 == 0 || n1 == n {
            continue;
        }
        let labeled = Dataset::from_parts(cov, Y34_DIM, z, Some(y))?;
        return Ok(SimDraw { labeled, pool: None, attempts: attempt as u32 + 1 });
    }
    Err(Error::Config(format!("seed {seed}: every draw left a group empty")))
}

/// Dispatches on the model family.
pub fn generate(model: &SimModel, seed: u64) -> Result<SimDraw> {
    if model.id.is_correlated_design() {
        generate_y1_y2(model, seed)
    } else {
        generate_y3_y4(model, seed)
    }
}

/// Monte Carlo check of the true ATT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrueAttCheck {
    /// Exact value: both arms share the response surface, so it is 0.
    pub value: f64,
    pub mc_estimate: f64,
    pub std_error: f64,
}

impl TrueAttCheck {
    pub fn consistent(&self) -> bool {
        (self.mc_estimate - self.value).abs() < 3.0 * self.std_error
    }
}

/// Simulates both potential outcomes for `mc_size` treated units and compares
/// the mean difference with the exact value 0.
pub fn true_att_check(id: ModelId, mc_size: usize, seed: u64) -> TrueAttCheck {
    let f = surface(id);
    let mut src = NormalSource::new(stream_rng(seed, STREAM_MC));
    let chol = ar1_cholesky(0.0, Y12_DIM);
    let mut sum = NeumaierSum::new();
    let mut sum_sq = NeumaierSum::new();
    let mut accepted = 0usize;
    let mut w = [0.0; Y12_DIM];
    while accepted < mc_size {
        let row: &[f64] = if id.is_correlated_design() {
            correlated_normal(&mut src, &chol, 0.5, &mut w);
            &w
        } else {
            for wk in w.iter_mut().take(Y34_DIM) {
                *wk = src.normal();
            }
            // Keep only units that the propensity model assigns to treatment.
            if src.uniform() >= ks_propensity(&w[..Y34_DIM]) {
                continue;
            }
            &w[..Y34_DIM]
        };
        let treated_outcome = f(row) + src.normal();
        let control_outcome = f(row) + src.normal();
        let diff = treated_outcome - control_outcome;
        sum.add(diff);
        sum_sq.add(diff * diff);
        accepted += 1;
    }
    let n = mc_size.max(1) as f64;
    let mean = sum.value() / n;
    let var = (sum_sq.value() / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    TrueAttCheck { value: 0.0, mc_estimate: mean, std_error: (var / n).sqrt() }
}

/// True ATT of the model, which is 0 for every design.
pub fn true_att(id: ModelId, mc_size: usize, seed: u64) -> f64 {
    true_att_check(id, mc_size, seed).value
}
