use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::json;
use wunt_core::data::{load_csv, DataError};
use wunt_core::estimator::{self, export_weights, EstimateReport};
use wunt_core::sim::{
    run_replications, run_warmup, timing_bench, EstimatorSpec, ModelId, SimModel, TransformerChoice, WarmupConfig,
};
use wunt_core::{BandwidthSpec, Dataset, EstimatorConfig, EstimatorKind, KernelOrder};

use crate::args::{BenchArgs, ConfigArgs, EstimateArgs, Format, InputArgs, SimulateArgs, TransformArgs, WarmupArgs};
use crate::error::{io_error, CliError};
use crate::output::{csv_to_markdown, emit};

/// Unlabeled pool size used for the y1/y2 designs when an estimator needs one.
const DEFAULT_POOL: usize = 10_000;

fn parse_enum<T: DeserializeOwned>(key: &str, value: &str) -> Result<T, CliError> {
    serde_json::from_value(serde_json::Value::String(value.to_string()))
        .map_err(|_| CliError::Config(format!("invalid value '{value}' for {key}")))
}

pub fn build_config(args: &ConfigArgs) -> Result<EstimatorConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| io_error(path.display(), e))?;
            EstimatorConfig::from_json(&text)
                .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))?
        }
        None => EstimatorConfig::default(),
    };
    if let Some(order) = args.kernel_order {
        cfg.kernel.order = KernelOrder::try_from(order).map_err(|e| CliError::Config(e.to_string()))?;
    }
    if let Some(text) = &args.kernel_bandwidth {
        let values = text
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| CliError::Config(format!("invalid value '{text}' for kernel.bandwidth")))?;
        cfg.kernel.bandwidth =
            Some(if values.len() == 1 { BandwidthSpec::Scalar(values[0]) } else { BandwidthSpec::PerDim(values) });
    }
    if let Some(family) = &args.basis_family {
        cfg.basis.family = parse_enum("basis.family", family)?;
    }
    if let Some(count) = args.basis_count {
        cfg.basis.count = Some(count);
    }
    if let Some(alpha) = args.alpha {
        cfg.smoothness.alpha = alpha;
    }
    if let Some(beta) = args.beta {
        cfg.smoothness.beta = beta;
    }
    if let Some(c) = args.scale_c {
        cfg.scale.c = c;
    }
    if let Some(rule) = &args.sample_size {
        cfg.sample_size = parse_enum("sample-size", rule)?;
    }
    if let Some(margin) = args.margin {
        cfg.margin = margin;
    }
    Ok(cfg)
}

fn read_header(path: &Path) -> Result<Vec<String>, CliError> {
    if !path.exists() {
        return Err(DataError::MissingFile(path.to_path_buf()).into());
    }
    let mut rdr = csv::Reader::from_path(path).map_err(DataError::from)?;
    Ok(rdr.headers().map_err(DataError::from)?.iter().map(|h| h.trim().to_string()).collect())
}

fn covariate_columns(input: &InputArgs, header: &[String], outcome: &str) -> Vec<String> {
    if !input.covariates.is_empty() {
        return input.covariates.clone();
    }
    header.iter().filter(|h| *h != &input.treatment && *h != outcome).cloned().collect()
}

fn load_pool(path: &Path, columns: &[String]) -> Result<Dataset, CliError> {
    let header = read_header(path)?;
    let idx = columns
        .iter()
        .map(|c| header.iter().position(|h| h == c).ok_or_else(|| DataError::MissingColumn(c.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rdr = csv::Reader::from_path(path).map_err(DataError::from)?;
    let mut cov = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(DataError::from)?;
        for (&i, name) in idx.iter().zip(columns) {
            let raw = rec.get(i).unwrap_or("").trim();
            let v = raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| DataError::NonNumeric {
                row: r + 1,
                column: name.clone(),
                value: raw.to_string(),
            })?;
            cov.push(v);
        }
    }
    let rows = cov.len() / columns.len();
    Ok(Dataset::new(cov, columns.len(), vec![0; rows], None, columns.to_vec())?)
}

fn parse_transformer(name: &str) -> Result<TransformerChoice, CliError> {
    name.parse().map_err(CliError::Config)
}

fn render(format: Format, json: impl FnOnce() -> serde_json::Value, csv: impl FnOnce() -> String) -> Result<String, CliError> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&json()).map_err(|e| CliError::Config(e.to_string()))? + "\n",
        Format::Csv => csv(),
        Format::Markdown => csv_to_markdown(&csv())?,
    })
}

fn report_csv(r: &EstimateReport) -> String {
    format!(
        "estimator,transformer,mu_ct_hat,mu_tt_hat,tau_att_hat,n0,n1,seconds\n{},{},{},{},{},{},{},{}\n",
        r.estimator, r.transformer, r.mu_ct_hat, r.mu_tt_hat, r.tau_att_hat, r.n0, r.n1, r.seconds
    )
}

pub fn estimate(args: &EstimateArgs, cfg: &EstimatorConfig, format: Format) -> Result<(), CliError> {
    let kind: EstimatorKind = args.estimator.parse().map_err(CliError::Config)?;
    let choice = parse_transformer(&args.input.transformer)?;
    let header = read_header(&args.input.input)?;
    let columns = covariate_columns(&args.input, &header, &args.outcome);
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let ds = load_csv(&args.input.input, &args.input.treatment, Some(&args.outcome), &cols)?;
    let pool = args.input.pool.as_deref().map(|p| load_pool(p, &columns)).transpose()?;
    ds.check_estimable()?;

    let (n0, n1, d) = (ds.n_control(), ds.n_treated(), ds.dim());
    let report = match kind {
        EstimatorKind::IpwLogistic => estimator::estimate_ipw_logistic(&ds)?,
        EstimatorKind::Kernel => {
            let t = choice.fit(&ds, pool.as_ref(), cfg.margin)?;
            let k = cfg.product_kernel(n0, n1, d).map_err(wunt_core::Error::from)?;
            estimator::estimate_kernel(&ds, &t, &k)?
        }
        EstimatorKind::Projection => {
            let t = choice.fit(&ds, pool.as_ref(), cfg.margin)?;
            let b = cfg.projection_basis(n0, n1, d).map_err(wunt_core::Error::from)?;
            estimator::estimate_projection(&ds, &t, &b)?
        }
    };
    if let Some(path) = &args.weights {
        export_weights(&report, path, args.clip)?;
    }
    let text = render(format, || serde_json::to_value(&report).unwrap_or_default(), || report_csv(&report))?;
    emit(&text, args.out.as_deref())
}

pub fn transform(args: &TransformArgs, cfg: &EstimatorConfig) -> Result<(), CliError> {
    let choice = parse_transformer(&args.input.transformer)?;
    let header = read_header(&args.input.input)?;
    let outcome = header.iter().any(|h| h == &args.outcome).then_some(args.outcome.as_str());
    let columns = covariate_columns(&args.input, &header, &args.outcome);
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let ds = load_csv(&args.input.input, &args.input.treatment, outcome, &cols)?;
    let pool = args.input.pool.as_deref().map(|p| load_pool(p, &columns)).transpose()?;
    let t = choice.fit(&ds, pool.as_ref(), cfg.margin)?;
    let out = t.transform_dataset(&ds)?;

    if let Some(path) = &args.partition {
        let p = t
            .partition()
            .ok_or_else(|| CliError::Config("--partition needs a joint transformer (joint or joint-extra)".into()))?;
        let json = p.to_json().map_err(|e| CliError::Config(e.to_string()))?;
        std::fs::write(path, json).map_err(|e| io_error(path.display(), e))?;
    }
    let mut buf = Vec::new();
    out.write_csv_to(&mut buf, &args.input.treatment, &args.outcome)?;
    emit(&String::from_utf8_lossy(&buf), args.out.as_deref())
}

fn simulation_model(args: &SimulateArgs, specs: &[EstimatorSpec]) -> Result<SimModel, CliError> {
    let id: ModelId = args.model.parse().map_err(CliError::Config)?;
    let model = if id.is_correlated_design() {
        let n = args.n.unwrap_or(1500);
        let n_treated = (n as f64 / 3.0).round() as usize;
        let needs_pool = specs.iter().any(|s| s.kind != EstimatorKind::IpwLogistic && s.transformer.needs_pool());
        let pool = args.pool.unwrap_or(if needs_pool { DEFAULT_POOL } else { 0 });
        SimModel::y1_y2(id, args.rho, n_treated, n - n_treated, pool)?
    } else {
        if args.pool.is_some_and(|p| p > 0) {
            return Err(CliError::Config(format!("model {id} has no unlabeled pool")));
        }
        SimModel::y3_y4(id, args.n.unwrap_or(1000))?
    };
    Ok(model)
}

pub fn simulate(args: &SimulateArgs, cfg: &EstimatorConfig, format: Format) -> Result<(), CliError> {
    let specs = EstimatorSpec::parse_list(&args.estimators).map_err(CliError::Config)?;
    if specs.is_empty() {
        return Err(CliError::Config("no estimators given".into()));
    }
    let model = simulation_model(args, &specs)?;
    let result = run_replications(&model, &specs, cfg, args.reps, args.seed)?;
    let text = render(
        format,
        || {
            json!({
                "model": result.model,
                "reps": args.reps,
                "seed": args.seed,
                "truth": result.truth,
                "config": cfg,
                "cells": result.summary(),
            })
        },
        || result.to_csv(),
    )?;
    emit(&text, args.out.as_deref())
}

pub fn bench(args: &BenchArgs, cfg: &EstimatorConfig, format: Format) -> Result<(), CliError> {
    let specs = EstimatorSpec::parse_list(&args.estimators).map_err(CliError::Config)?;
    let table = timing_bench(&args.sizes, &specs, cfg, args.reps, args.seed, args.bench_threads)?;
    let text = render(
        format,
        || serde_json::to_value(&table).unwrap_or_default(),
        || {
            let mut out = String::from("estimator,n,mean_seconds,loglog_slope\n");
            for r in &table.rows {
                let slope = table.slope(&r.estimator).unwrap_or(f64::NAN);
                out.push_str(&format!("{},{},{},{}\n", r.estimator, r.n, r.mean_seconds, slope));
            }
            out
        },
    )?;
    emit(&text, args.out.as_deref())
}

pub fn demo_warmup(args: &WarmupArgs, format: Format) -> Result<(), CliError> {
    let cfg = WarmupConfig {
        n: args.n,
        reps: args.reps,
        grid: args.grid.clone(),
        response: args.response.parse().map_err(CliError::Config)?,
        beta: args.beta,
        seed: args.seed,
    };
    let report = run_warmup(&cfg)?;
    let text = render(format, || serde_json::to_value(&report).unwrap_or_default(), || report.to_csv())?;
    emit(&text, args.out.as_deref())
}
