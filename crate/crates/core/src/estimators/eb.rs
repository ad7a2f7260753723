use std::collections::BTreeMap;

use super::{Diagnostics, FitResult, Objective, ObjectiveKind, Rule};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::families::FamilyKind;
use crate::numeric::ln_gamma;
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::ure::{ure_param, ParamRule};

const LN_GAMMA_RANGE: (f64, f64) = (-20.0, 25.0);
const LOGIT_MU_RANGE: (f64, f64) = (-20.0, 20.0);
const LN_MU_RANGE: (f64, f64) = (-25.0, 25.0);
const START_MARGIN: f64 = 1e-6;

fn unsupported(family: FamilyKind, operation: &'static str) -> Error {
    Error::UnsupportedFamily {
        family: family.to_string(),
        operation,
    }
}

/// `ln Γ(x + k) − ln Γ(x)`, summed directly for small integer `k`.
fn ln_rising(x: f64, k: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else if k.fract() == 0.0 && k <= 64.0 {
        (0..k as usize).map(|j| (x + j as f64).ln()).sum()
    } else {
        ln_gamma(x + k) - ln_gamma(x)
    }
}

fn tally(values: impl Iterator<Item = f64>) -> Vec<(f64, f64)> {
    let mut map: BTreeMap<u64, f64> = BTreeMap::new();
    for v in values {
        *map.entry(v.to_bits()).or_default() += 1.0;
    }
    map.into_iter().map(|(k, c)| (f64::from_bits(k), c)).collect()
}

/// Log marginal likelihood terms that depend on `(γ, μ)`, pre-aggregated
/// over repeated counts and exposures.
enum Marginal {
    Binomial {
        successes: Vec<(f64, f64)>,
        failures: Vec<(f64, f64)>,
        trials: Vec<(f64, f64)>,
    },
    Poisson {
        counts: Vec<(f64, f64)>,
        /// (τ, multiplicity, Σ counts)
        exposures: Vec<(f64, f64, f64)>,
    },
}

impl Marginal {
    fn new(data: &Dataset) -> Result<Self> {
        let y = data.y();
        let tau = data.tau();
        match data.family() {
            FamilyKind::Binomial => {
                let k: Vec<f64> = y.iter().zip(tau).map(|(y, t)| (y * t).round()).collect();
                Ok(Marginal::Binomial {
                    successes: tally(k.iter().copied()),
                    failures: tally(k.iter().zip(tau).map(|(k, t)| t - k)),
                    trials: tally(tau.iter().copied()),
                })
            }
            FamilyKind::Poisson => {
                let mut map: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
                for (y, t) in y.iter().zip(tau) {
                    let e = map.entry(t.to_bits()).or_default();
                    e.0 += 1.0;
                    e.1 += y * t;
                }
                Ok(Marginal::Poisson {
                    counts: tally(y.iter().zip(tau).map(|(y, t)| y * t)),
                    exposures: map.into_iter().map(|(t, (n, k))| (f64::from_bits(t), n, k)).collect(),
                })
            }
            other => Err(unsupported(other, "marginal likelihood")),
        }
    }

    fn log_likelihood(&self, gamma: f64, mu: f64) -> f64 {
        match self {
            Marginal::Binomial {
                successes,
                failures,
                trials,
            } => {
                let a = gamma * mu;
                let b = gamma * (1.0 - mu);
                let mut total = 0.0;
                for &(k, c) in successes {
                    total += c * ln_rising(a, k);
                }
                for &(k, c) in failures {
                    total += c * ln_rising(b, k);
                }
                for &(t, c) in trials {
                    total -= c * ln_rising(gamma, t);
                }
                total
            }
            Marginal::Poisson { counts, exposures } => {
                let a = gamma * mu;
                let mut total = 0.0;
                for &(k, c) in counts {
                    total += c * ln_rising(a, k);
                }
                for &(t, n, k) in exposures {
                    total -= n * a * (t / gamma).ln_1p() + k * (t + gamma).ln();
                }
                total
            }
        }
    }
}

/// Beta-binomial log marginal likelihood of the success counts, dropping
/// terms free of `(γ, μ)`.
pub fn binomial_log_marginal(data: &Dataset, gamma: f64, mu: f64) -> Result<f64> {
    match data.family() {
        FamilyKind::Binomial => Ok(Marginal::new(data)?.log_likelihood(gamma, mu)),
        other => Err(unsupported(other, "binomial marginal likelihood")),
    }
}

/// Negative-binomial (Poisson–gamma) log marginal likelihood of the counts
/// `τ·Y`, dropping terms free of `(γ, μ)`.
pub fn poisson_log_marginal(data: &Dataset, gamma: f64, mu: f64) -> Result<f64> {
    match data.family() {
        FamilyKind::Poisson => Ok(Marginal::new(data)?.log_likelihood(gamma, mu)),
        other => Err(unsupported(other, "Poisson marginal likelihood")),
    }
}

fn with_ure(data: &Dataset, rule: ParamRule, diagnostics: Diagnostics) -> Result<FitResult> {
    let value = ure_param(data, &rule)?;
    Ok(FitResult::new(
        data,
        Rule::Param(rule),
        Some(Objective {
            kind: ObjectiveKind::UreParam,
            value,
        }),
        diagnostics,
    ))
}

/// Method-of-moments empirical Bayes (binomial and Poisson). A nonpositive
/// moment denominator gives `γ = ∞`.
pub fn fit_eb_mm(data: &Dataset) -> Result<FitResult> {
    let ybar = data.mean_y();
    let pairs = || data.y().iter().zip(data.tau());
    let (num, den) = match data.family() {
        FamilyKind::Binomial => (
            ybar * (1.0 - ybar) * pairs().map(|(_, t)| 1.0 - 1.0 / t).sum::<f64>(),
            pairs()
                .map(|(y, t)| y * y - ybar / t - ybar * ybar * (1.0 - 1.0 / t))
                .sum::<f64>(),
        ),
        FamilyKind::Poisson => (
            data.len() as f64 * ybar,
            pairs().map(|(y, t)| y * y - ybar / t - ybar * ybar).sum::<f64>(),
        ),
        other => return Err(unsupported(other, "eb-mm")),
    };
    let gamma = if den > 0.0 { num / den } else { f64::INFINITY };
    with_ure(
        data,
        ParamRule::new(gamma, ybar),
        Diagnostics {
            evaluations: 1,
            iterations: 0,
            note: Some(format!("moment denominator {den}")),
        },
    )
}

/// Marginal maximum-likelihood empirical Bayes (binomial and Poisson),
/// by Nelder–Mead on `(ln γ, logit μ)` or `(ln γ, ln μ)` from four starts.
pub fn fit_eb_ml(data: &Dataset) -> Result<FitResult> {
    let family = data.family();
    let marginal = Marginal::new(data)?;
    let binomial = family == FamilyKind::Binomial;
    let mu_range = if binomial { LOGIT_MU_RANGE } else { LN_MU_RANGE };
    let to_x = |mu: f64| if binomial { (mu / (1.0 - mu)).ln() } else { mu.ln() };
    let to_mu = |x: f64| if binomial { 1.0 / (1.0 + (-x).exp()) } else { x.exp() };
    let decode = |x: &[f64]| {
        (
            x[0].clamp(LN_GAMMA_RANGE.0, LN_GAMMA_RANGE.1).exp(),
            to_mu(x[1].clamp(mu_range.0, mu_range.1)),
        )
    };
    let clamp_mu = |m: f64| {
        if binomial {
            m.clamp(START_MARGIN, 1.0 - START_MARGIN)
        } else {
            m.max(START_MARGIN)
        }
    };
    let mut y = data.y().to_vec();
    y.sort_by(f64::total_cmp);
    let n = y.len();
    let median = if n % 2 == 1 { y[n / 2] } else { 0.5 * (y[n / 2 - 1] + y[n / 2]) };
    let m = clamp_mu(data.mean_y());
    let q = clamp_mu(median);

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut iterations = 0;
    for (g, mu) in [(0.5, m), (5.0, m), (0.5, q), (5.0, q)] {
        let start = [f64::ln(g), to_x(mu)];
        let result = nelder_mead(
            |x| {
                let (gamma, mu) = decode(x);
                -marginal.log_likelihood(gamma, mu)
            },
            &start,
            NelderMeadOptions::default(),
        );
        iterations += result.iterations;
        if result.value.is_finite() && best.as_ref().is_none_or(|(v, _)| result.value < *v) {
            best = Some((result.value, result.x));
        }
    }
    let (value, x) = best.ok_or_else(|| Error::OptimizationFailed("no start gave a finite likelihood".into()))?;
    let (gamma, mu) = decode(&x);
    with_ure(
        data,
        ParamRule::new(gamma, mu),
        Diagnostics {
            evaluations: 0,
            iterations,
            note: Some(format!("log marginal likelihood {}", -value)),
        },
    )
}
