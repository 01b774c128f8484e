//! Replication engine: bias and RMSE of ATT estimators over repeated draws.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::models::{generate, SimDraw, SimModel};
use super::rng::replication_seed;
use crate::config::EstimatorConfig;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimator::{self, EstimateError, EstimatorKind};
use crate::summation::NeumaierSum;
use crate::transformer::UniformTransformer;

/// Share of failed replications above which a cell is reported as failed.
pub const MAX_FAILURE_SHARE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransformerChoice {
    #[serde(rename = "identity")]
    Identity,
    #[serde(rename = "joint")]
    Joint,
    #[serde(rename = "marginal")]
    Marginal,
    #[serde(rename = "joint-extra")]
    JointExtra,
    #[serde(rename = "marginal-extra")]
    MarginalExtra,
    #[serde(rename = "plugin")]
    Plugin,
}

impl TransformerChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            TransformerChoice::Identity => "identity",
            TransformerChoice::Joint => "joint",
            TransformerChoice::Marginal => "marginal",
            TransformerChoice::JointExtra => "joint-extra",
            TransformerChoice::MarginalExtra => "marginal-extra",
            TransformerChoice::Plugin => "plugin",
        }
    }

    pub fn needs_pool(self) -> bool {
        matches!(self, TransformerChoice::JointExtra | TransformerChoice::MarginalExtra)
    }

    /// Fits the transformer on `ds` (and `pool` for the `-extra` variants and
    /// the plug-in; the plug-in falls back to the labeled controls).
    pub fn fit(self, ds: &Dataset, pool: Option<&Dataset>, margin: f64) -> Result<UniformTransformer> {
        let missing_pool = || Error::Config(format!("transformer '{}' needs an unlabeled pool", self.as_str()));
        let t = match self {
            TransformerChoice::Identity => UniformTransformer::identity(ds.dim()),
            TransformerChoice::Joint => UniformTransformer::fit_adaptive(ds, margin)?,
            TransformerChoice::Marginal => UniformTransformer::fit_marginal(ds, margin)?,
            TransformerChoice::JointExtra => {
                UniformTransformer::fit_adaptive_with_pool(ds, pool.ok_or_else(missing_pool)?, margin)?
            }
            TransformerChoice::MarginalExtra => {
                UniformTransformer::fit_marginal_with_pool(ds, pool.ok_or_else(missing_pool)?, margin)?
            }
            TransformerChoice::Plugin => match pool {
                Some(p) => UniformTransformer::plugin_from_samples(p.covariates(), ds.dim())?,
                None => UniformTransformer::plugin_from_samples(&ds.group_covariates(false), ds.dim())?,
            },
        };
        Ok(t)
    }
}

impl std::str::FromStr for TransformerChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "identity" => Ok(TransformerChoice::Identity),
            "joint" => Ok(TransformerChoice::Joint),
            "marginal" => Ok(TransformerChoice::Marginal),
            "joint-extra" => Ok(TransformerChoice::JointExtra),
            "marginal-extra" => Ok(TransformerChoice::MarginalExtra),
            "plugin" => Ok(TransformerChoice::Plugin),
            other => Err(format!(
                "unknown transformer '{other}' (identity, joint, marginal, joint-extra, marginal-extra, plugin)"
            )),
        }
    }
}

/// An estimator in a simulation table: `kernel+joint`, `projection+marginal`,
/// `ipw-logistic`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    /// Ignored by the IPW baseline.
    pub transformer: TransformerChoice,
}

impl EstimatorSpec {
    pub fn new(kind: EstimatorKind, transformer: TransformerChoice) -> Self {
        Self { kind, transformer }
    }

    pub fn ipw() -> Self {
        Self { kind: EstimatorKind::IpwLogistic, transformer: TransformerChoice::Identity }
    }

    pub fn label(&self) -> String {
        match self.kind {
            EstimatorKind::IpwLogistic => self.kind.as_str().to_string(),
            _ => format!("{}+{}", self.kind.as_str(), self.transformer.as_str()),
        }
    }

    pub fn parse_list(text: &str) -> std::result::Result<Vec<Self>, String> {
        text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
    }

    /// `τ̂_ATT` on one draw. `Ok(None)` marks a numerical failure (no
    /// overlap, or a logistic fit that does not converge).
    pub fn estimate(&self, draw: &SimDraw, cfg: &EstimatorConfig) -> Result<Option<f64>> {
        let ds = &draw.labeled;
        let (n0, n1, d) = (ds.n_control(), ds.n_treated(), ds.dim());
        let outcome = match self.kind {
            EstimatorKind::IpwLogistic => estimator::estimate_ipw_logistic(ds),
            EstimatorKind::Kernel => {
                let t = self.transformer.fit(ds, draw.pool.as_ref(), cfg.margin)?;
                let k = cfg.product_kernel(n0, n1, d)?;
                estimator::estimate_kernel(ds, &t, &k)
            }
            EstimatorKind::Projection => {
                let t = self.transformer.fit(ds, draw.pool.as_ref(), cfg.margin)?;
                let b = cfg.projection_basis(n0, n1, d)?;
                estimator::estimate_projection(ds, &t, &b)
            }
        };
        match outcome {
            Ok(r) => Ok(Some(r.tau_att_hat)),
            Err(EstimateError::Overlap { .. } | EstimateError::Separation | EstimateError::NonConvergence { .. }) => {
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl std::fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for EstimatorSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (kind, transformer) = match s.split_once('+') {
            Some((k, t)) => (k.parse::<EstimatorKind>()?, t.parse::<TransformerChoice>()?),
            None => (s.parse::<EstimatorKind>()?, TransformerChoice::Identity),
        };
        if kind != EstimatorKind::IpwLogistic && !s.contains('+') {
            return Err(format!("'{s}' needs a transformer, e.g. '{s}+joint'"));
        }
        Ok(Self { kind, transformer })
    }
}

/// Per-estimator draws across replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationResult {
    pub model: SimModel,
    pub labels: Vec<String>,
    /// `estimates[e][r]`: `τ̂` of estimator `e` in replication `r`; `None` on
    /// numerical failure.
    pub estimates: Vec<Vec<Option<f64>>>,
    /// `seconds[e][r]`: wall time of transformer fit plus estimation.
    pub seconds: Vec<Vec<f64>>,
    /// Seed of each replication.
    pub seeds: Vec<u64>,
    /// Y3/Y4 redraw count per replication (1 when the first draw was usable).
    pub attempts: Vec<u32>,
    pub truth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub estimator: String,
    pub bias: f64,
    pub rmse: f64,
    /// Sample variance (denominator `R - 1`) of the successful draws.
    pub variance: f64,
    /// Monte Carlo standard error of the bias.
    pub bias_se: f64,
    pub successes: usize,
    pub failures: usize,
    /// Too many failures to report a number.
    pub failed: bool,
    pub mean_seconds: f64,
}

impl ReplicationResult {
    pub fn summary(&self) -> Vec<CellSummary> {
        self.labels
            .iter()
            .zip(&self.estimates)
            .zip(&self.seconds)
            .map(|((label, draws), secs)| summarize(label, draws, secs, self.truth))
            .collect()
    }

    pub fn cell(&self, label: &str) -> Option<CellSummary> {
        self.summary().into_iter().find(|c| c.estimator == label)
    }

    /// CSV with one row per estimator.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,rho,n,reps,estimator,bias,rmse,sd,successes,failures,status,mean_seconds\n");
        let reps = self.seeds.len();
        for c in self.summary() {
            let status = if c.failed { "failed" } else { "ok" };
            let (bias, rmse, sd) = if c.failed {
                (String::new(), String::new(), String::new())
            } else {
                (format!("{}", c.bias), format!("{}", c.rmse), format!("{}", c.variance.sqrt()))
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                self.model.id,
                self.model.rho,
                self.model.n,
                reps,
                c.estimator,
                bias,
                rmse,
                sd,
                c.successes,
                c.failures,
                status,
                c.mean_seconds
            ));
        }
        out
    }
}

fn summarize(label: &str, draws: &[Option<f64>], secs: &[f64], truth: f64) -> CellSummary {
    let ok: Vec<f64> = draws.iter().flatten().copied().collect();
    let failures = draws.len() - ok.len();
    let failed = ok.is_empty() || failures as f64 > MAX_FAILURE_SHARE * draws.len() as f64;
    let m = ok.len() as f64;
    let mut sum = NeumaierSum::new();
    ok.iter().for_each(|&t| sum.add(t));
    let mean = sum.value() / m;
    let mut sq = NeumaierSum::new();
    ok.iter().for_each(|&t| sq.add((t - truth) * (t - truth)));
    let mut dev = NeumaierSum::new();
    ok.iter().for_each(|&t| dev.add((t - mean) * (t - mean)));
    let variance = if ok.len() > 1 { dev.value() / (m - 1.0) } else { 0.0 };
    let mean_seconds = secs.iter().sum::<f64>() / secs.len().max(1) as f64;
    CellSummary {
        estimator: label.to_string(),
        bias: mean - truth,
        rmse: (sq.value() / m).sqrt(),
        variance,
        bias_se: (variance / m).sqrt(),
        successes: ok.len(),
        failures,
        failed,
        mean_seconds,
    }
}

/// Runs `reps` replications. Replication `r` draws with seed
/// `base_seed ^ r`, and every estimator sees the same draw.
pub fn run_replications(
    model: &SimModel,
    specs: &[EstimatorSpec],
    cfg: &EstimatorConfig,
    reps: usize,
    base_seed: u64,
) -> Result<ReplicationResult> {
    model.validate()?;
    if reps < 1 {
        return Err(Error::Config("need at least one replication".into()));
    }
    if specs.is_empty() {
        return Err(Error::Config("no estimators requested".into()));
    }
    if let Some(s) = specs.iter().find(|s| s.kind != EstimatorKind::IpwLogistic && s.transformer.needs_pool()) {
        if !model.has_pool() {
            return Err(Error::Config(format!("'{}' needs an unlabeled pool (set n_unlabeled)", s.label())));
        }
    }
    type Row = (u64, u32, Vec<(Option<f64>, f64)>);
    let rows: Vec<Row> = (0..reps as u64)
        .into_par_iter()
        .map(|r| -> Result<Row> {
            let seed = replication_seed(base_seed, r);
            let draw = generate(model, seed)?;
            let cells = specs
                .iter()
                .map(|s| {
                    let start = Instant::now();
                    let tau = s.estimate(&draw, cfg)?;
                    Ok((tau, start.elapsed().as_secs_f64()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((seed, draw.attempts, cells))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut estimates = vec![Vec::with_capacity(reps); specs.len()];
    let mut seconds = vec![Vec::with_capacity(reps); specs.len()];
    let mut seeds = Vec::with_capacity(reps);
    let mut attempts = Vec::with_capacity(reps);
    for (seed, att, cells) in rows {
        seeds.push(seed);
        attempts.push(att);
        for (e, (tau, secs)) in cells.into_iter().enumerate() {
            estimates[e].push(tau);
            seconds[e].push(secs);
        }
    }
    Ok(ReplicationResult {
        model: model.clone(),
        labels: specs.iter().map(EstimatorSpec::label).collect(),
        estimates,
        seconds,
        seeds,
        attempts,
        truth: 0.0,
    })
}
