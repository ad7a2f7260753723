use super::param::{search_gamma, weighted_location};
use super::{BlockStats, Diagnostics, FitResult, Objective, ObjectiveKind, Rule};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::families::variance_function;
use crate::isotonic::TauBlocks;
use crate::numeric::csum;
use crate::ure::{shrinkage_factor, ParamRule};

fn sampling_variances(data: &Dataset, truth: &[f64]) -> Result<Vec<f64>> {
    if truth.len() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: data.len(),
            actual: truth.len(),
        });
    }
    truth
        .iter()
        .zip(data.tau())
        .map(|(&theta, &t)| Ok(variance_function(data.family(), theta)? / t))
        .collect()
}

/// Exact risk `(1/p) Σ [(1 − b_i)²·V(θ_i)/τ_i + b_i²(μ − θ_i)²]` of a
/// parametric rule given the true means.
pub fn oracle_risk(data: &Dataset, truth: &[f64], rule: &ParamRule) -> Result<f64> {
    let var = sampling_variances(data, truth)?;
    let total = csum(truth.iter().zip(data.tau()).zip(&var).map(|((&theta, &t), &v)| {
        let b = rule.shrinkage(t);
        (1.0 - b) * (1.0 - b) * v + b * b * (rule.mu - theta).powi(2)
    }));
    Ok(total / data.len() as f64)
}

/// Parametric rule minimizing the exact risk given the true means
/// (an infeasible benchmark for simulations).
pub fn fit_oracle(data: &Dataset, truth: &[f64]) -> Result<FitResult> {
    let var = sampling_variances(data, truth)?;
    let stats = BlockStats::new(&TauBlocks::new(data.tau()), truth, &var);
    let theta_bar = truth.iter().sum::<f64>() / truth.len() as f64;
    let p = data.len() as f64;
    let location = |gamma: f64| weighted_location(&stats, gamma).unwrap_or(theta_bar);
    let found = search_gamma(|gamma| {
        let mu = location(gamma);
        let mut total = 0.0;
        for k in 0..stats.len() {
            let b = shrinkage_factor(gamma, stats.tau[k]);
            total += (1.0 - b) * (1.0 - b) * stats.extra[k] + b * b * stats.sq_dev(k, mu);
        }
        total / p
    });
    let rule = ParamRule::new(found.gamma, location(found.gamma));
    let value = oracle_risk(data, truth, &rule)?;
    Ok(FitResult::new(
        data,
        Rule::Param(rule),
        Some(Objective {
            kind: ObjectiveKind::OracleRisk,
            value,
        }),
        Diagnostics {
            evaluations: found.evaluations,
            iterations: 0,
            note: None,
        },
    ))
}
