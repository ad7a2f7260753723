//! Monte Carlo risk estimation over the registered scenarios.

mod scenarios;

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

pub use scenarios::{Draw, Generator, ScenarioSpec};

use crate::error::{Error, Result};
use crate::estimators::{Estimator, FitOptions};
use crate::numeric::{format_sig, CompensatedSum};
use crate::rng::replication_rng;
use crate::ure::squared_error_loss;

pub const CSV_HEADER: &str = "scenario,p,estimator,risk,se,n_reps,seed";
pub const DEFAULT_REPS: usize = 10_000;
const CSV_DIGITS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub p_list: Vec<usize>,
    pub n_reps: usize,
    pub seed: u64,
    pub estimators: Vec<Estimator>,
    pub fit_options: FitOptions,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(p_list: Vec<usize>, n_reps: usize, seed: u64, estimators: Vec<Estimator>) -> Self {
        Self {
            p_list,
            n_reps,
            seed,
            estimators,
            fit_options: FitOptions::default(),
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskRow {
    pub p: usize,
    pub estimator: Estimator,
    /// Mean loss `(1/p) Σ (θ̂_i − θ_i)²` over replications.
    pub risk: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub scenario: String,
    pub n_reps: usize,
    pub seed: u64,
    /// One row per (p, estimator), p in the requested order.
    pub rows: Vec<RiskRow>,
}

impl RiskReport {
    pub fn row(&self, p: usize, estimator: Estimator) -> Option<&RiskRow> {
        self.rows.iter().find(|r| r.p == p && r.estimator == estimator)
    }
}

/// Losses of every requested estimator on one replication.
pub fn replication_losses(spec: &ScenarioSpec, p: usize, rep: u64, config: &RunConfig) -> Result<Vec<f64>> {
    let mut rng = replication_rng(config.seed, p, rep);
    let draw = spec.draw(p, &mut rng)?;
    config
        .estimators
        .iter()
        .map(|e| {
            let fit = e.fit(&draw.data, Some(&draw.theta), &config.fit_options)?;
            squared_error_loss(&fit.estimates, &draw.theta)
        })
        .collect()
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().collect::<CompensatedSum>().value() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss = values.map(|v| (v - mean).powi(2)).collect::<CompensatedSum>().value();
    (mean, (ss / (n - 1) as f64 / n as f64).sqrt())
}

fn run_inner(spec: &ScenarioSpec, config: &RunConfig) -> Result<RiskReport> {
    let mut rows = Vec::with_capacity(config.p_list.len() * config.estimators.len());
    for &p in &config.p_list {
        let losses: Vec<Vec<f64>> = (0..config.n_reps as u64)
            .into_par_iter()
            .map(|rep| replication_losses(spec, p, rep, config))
            .collect::<Result<_>>()?;
        for (k, &estimator) in config.estimators.iter().enumerate() {
            let (risk, se) = mean_and_se(losses.iter().map(|l| l[k]), config.n_reps);
            rows.push(RiskRow { p, estimator, risk, se });
        }
    }
    Ok(RiskReport {
        scenario: spec.id.clone(),
        n_reps: config.n_reps,
        seed: config.seed,
        rows,
    })
}

/// Estimates the risk of each estimator at each `p`. Output depends only on
/// the scenario and configuration, never on the thread count.
pub fn run_scenario(spec: &ScenarioSpec, config: &RunConfig) -> Result<RiskReport> {
    if config.n_reps == 0 {
        return Err(Error::InvalidArgument("n_reps must be at least 1".into()));
    }
    if config.p_list.is_empty() || config.p_list.contains(&0) {
        return Err(Error::InvalidArgument("p list must be nonempty and positive".into()));
    }
    for e in &config.estimators {
        if !e.supports(spec.family) {
            return Err(Error::UnsupportedFamily {
                family: spec.family.to_string(),
                operation: e.name(),
            });
        }
        if matches!(e, Estimator::JamesStein | Estimator::JamesSteinLiteral) && config.p_list.iter().any(|&p| p < 4) {
            return Err(Error::InvalidArgument("James-Stein needs p >= 4".into()));
        }
    }
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(|| run_inner(spec, config)),
        None => run_inner(spec, config),
    }
}

/// Writes the report as CSV.
pub fn write_csv<W: Write>(report: &RiskReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for row in &report.rows {
        w.write_record([
            report.scenario.clone(),
            row.p.to_string(),
            row.estimator.name().to_string(),
            format_sig(row.risk, CSV_DIGITS),
            format_sig(row.se, CSV_DIGITS),
            report.n_reps.to_string(),
            report.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(report: &RiskReport, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(report, std::io::BufWriter::new(file))
}
