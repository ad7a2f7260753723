//! Fitters for every shrinkage estimator, sharing one result type.

mod baseline;
mod eb;
mod oracle;
mod param;
mod semi;

use std::fmt;
use std::str::FromStr;

pub use baseline::{fit_grand_mean, fit_james_stein, fit_naive};
pub use eb::{binomial_log_marginal, fit_eb_ml, fit_eb_mm, poisson_log_marginal};
pub use oracle::{fit_oracle, oracle_risk};
pub use param::{fit_param, fit_param_grand, GAMMA_GRID_POINTS};
pub use semi::{fit_semi, fit_semi_grand, DEFAULT_MU_GRID};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::families::FamilyKind;
use crate::isotonic::TauBlocks;
use crate::ure::{ParamRule, SemiRule};

/// The fitted shrinkage rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    /// `θ̂ = Y`.
    Identity,
    Semi(SemiRule),
    Param(ParamRule),
    /// `θ̂ = shift + scale·Y` (the literal printed James–Stein variant).
    ShiftScale { shift: f64, scale: f64 },
}

impl Rule {
    /// Applies the rule to the data it was fitted on.
    pub fn apply(&self, data: &Dataset) -> Vec<f64> {
        match self {
            Rule::Identity => data.y().to_vec(),
            Rule::Semi(r) => r.apply(data.y()),
            Rule::Param(r) => r.apply(data.y(), data.tau()),
            Rule::ShiftScale { shift, scale } => data.y().iter().map(|y| shift + scale * y).collect(),
        }
    }
}

/// Which objective a fitter minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    Ure,
    UreGrand,
    UreParam,
    UreParamGrand,
    /// Exact risk given the true means (simulation only).
    OracleRisk,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Objective evaluations (grid points plus refinement steps).
    pub evaluations: usize,
    /// Optimizer iterations, where an iterative method was used.
    pub iterations: usize,
    pub note: Option<String>,
}

/// Output of every fitter.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub estimates: Vec<f64>,
    pub rule: Rule,
    /// The minimized objective, for fitters that minimize one.
    pub objective: Option<Objective>,
    pub diagnostics: Diagnostics,
}

impl FitResult {
    pub(crate) fn new(data: &Dataset, rule: Rule, objective: Option<Objective>, diagnostics: Diagnostics) -> Self {
        Self {
            estimates: rule.apply(data),
            rule,
            objective,
            diagnostics,
        }
    }
}

/// Conjugate-prior hyper-parameters with their `(γ, μ)` parameterization.
///
/// `alpha`/`beta_or_lambda` are, per family: binomial Beta(α, β); Poisson
/// Γ(α, λ); negative binomial Beta(α, β) on p; gamma inv-Γ(α₀, β₀) on λ;
/// normal N(μ, λ) stored as (μ, λ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub alpha: f64,
    pub beta_or_lambda: f64,
    pub gamma: f64,
    pub mu: f64,
}

impl HyperParams {
    /// Maps conjugate hyper-parameters to `(γ, μ)`.
    pub fn from_prior(family: FamilyKind, alpha: f64, beta_or_lambda: f64) -> Result<Self> {
        let (gamma, mu) = match family {
            FamilyKind::Normal => (1.0 / beta_or_lambda, alpha),
            FamilyKind::Binomial => (alpha + beta_or_lambda, alpha / (alpha + beta_or_lambda)),
            FamilyKind::Poisson => (1.0 / beta_or_lambda, alpha * beta_or_lambda),
            FamilyKind::NegBinomial => (beta_or_lambda - 1.0, alpha / (beta_or_lambda - 1.0)),
            FamilyKind::Gamma { alpha: shape } => ((alpha - 1.0) / shape, shape * beta_or_lambda / (alpha - 1.0)),
            other => {
                return Err(Error::UnsupportedFamily {
                    family: other.to_string(),
                    operation: "conjugate prior",
                })
            }
        };
        Ok(Self {
            alpha,
            beta_or_lambda,
            gamma,
            mu,
        })
    }

    /// Inverts the mapping for a fitted parametric rule.
    pub fn from_rule(family: FamilyKind, rule: &ParamRule) -> Result<Self> {
        let ParamRule { gamma, mu } = *rule;
        let (alpha, second) = match family {
            FamilyKind::Normal => (mu, 1.0 / gamma),
            FamilyKind::Binomial => (gamma * mu, gamma * (1.0 - mu)),
            FamilyKind::Poisson => (gamma * mu, 1.0 / gamma),
            FamilyKind::NegBinomial => (gamma * mu, gamma + 1.0),
            FamilyKind::Gamma { alpha: shape } => (gamma * shape + 1.0, mu * gamma),
            other => {
                return Err(Error::UnsupportedFamily {
                    family: other.to_string(),
                    operation: "conjugate prior",
                })
            }
        };
        Ok(Self {
            alpha,
            beta_or_lambda: second,
            gamma,
            mu,
        })
    }
}

/// Per-τ-block summaries of a value vector (observations or true means)
/// plus an auxiliary additive quantity; blocks follow [`TauBlocks`] order.
#[derive(Debug, Clone)]
pub(crate) struct BlockStats {
    pub tau: Vec<f64>,
    pub n: Vec<f64>,
    pub mean: Vec<f64>,
    /// Within-block sum of squared deviations from the block mean.
    pub ss: Vec<f64>,
    pub extra: Vec<f64>,
}

impl BlockStats {
    pub fn new(blocks: &TauBlocks, values: &[f64], extra: &[f64]) -> Self {
        let k = blocks.num_blocks();
        let mut stats = BlockStats {
            tau: blocks.block_tau().to_vec(),
            n: Vec::with_capacity(k),
            mean: Vec::with_capacity(k),
            ss: Vec::with_capacity(k),
            extra: Vec::with_capacity(k),
        };
        for b in 0..k {
            let idx = blocks.block(b);
            let n = idx.len() as f64;
            let mean = idx.iter().map(|&i| values[i]).sum::<f64>() / n;
            let ss = idx.iter().map(|&i| (values[i] - mean).powi(2)).sum::<f64>();
            stats.n.push(n);
            stats.mean.push(mean);
            stats.ss.push(ss);
            stats.extra.push(idx.iter().map(|&i| extra[i]).sum());
        }
        stats
    }

    /// `Σ_{i in block k} (v_i − c)²`.
    #[inline]
    pub fn sq_dev(&self, k: usize, c: f64) -> f64 {
        let d = self.mean[k] - c;
        self.ss[k] + self.n[k] * d * d
    }

    pub fn len(&self) -> usize {
        self.n.len()
    }
}

/// Tuning knobs shared by the fitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub mu_grid_size: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            mu_grid_size: DEFAULT_MU_GRID,
        }
    }
}

/// Every estimator by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    Naive,
    GrandMean,
    JamesStein,
    JamesSteinLiteral,
    Semi,
    SemiGrand,
    Param,
    ParamGrand,
    EbMm,
    EbMl,
    Oracle,
}

impl Estimator {
    pub const ALL: [Estimator; 11] = [
        Estimator::Naive,
        Estimator::GrandMean,
        Estimator::JamesStein,
        Estimator::JamesSteinLiteral,
        Estimator::Semi,
        Estimator::SemiGrand,
        Estimator::Param,
        Estimator::ParamGrand,
        Estimator::EbMm,
        Estimator::EbMl,
        Estimator::Oracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Naive => "naive",
            Estimator::GrandMean => "grand-mean",
            Estimator::JamesStein => "js",
            Estimator::JamesSteinLiteral => "js-literal",
            Estimator::Semi => "sm",
            Estimator::SemiGrand => "sg",
            Estimator::Param => "pm",
            Estimator::ParamGrand => "pg",
            Estimator::EbMm => "eb-mm",
            Estimator::EbMl => "eb-ml",
            Estimator::Oracle => "oracle",
        }
    }

    pub fn valid_names() -> String {
        Estimator::ALL.iter().map(|e| e.name()).collect::<Vec<_>>().join(", ")
    }

    /// Whether the estimator needs the true means.
    pub fn needs_truth(&self) -> bool {
        matches!(self, Estimator::Oracle)
    }

    /// Whether the estimator can be fitted to data of this family.
    pub fn supports(&self, family: FamilyKind) -> bool {
        match self {
            Estimator::EbMm | Estimator::EbMl => matches!(family, FamilyKind::Binomial | FamilyKind::Poisson),
            _ => true,
        }
    }

    /// Fits the estimator; `truth` is required only by the oracle.
    pub fn fit(&self, data: &Dataset, truth: Option<&[f64]>, opts: &FitOptions) -> Result<FitResult> {
        match self {
            Estimator::Naive => fit_naive(data),
            Estimator::GrandMean => fit_grand_mean(data),
            Estimator::JamesStein => fit_james_stein(data, false),
            Estimator::JamesSteinLiteral => fit_james_stein(data, true),
            Estimator::Semi => fit_semi(data, opts.mu_grid_size),
            Estimator::SemiGrand => fit_semi_grand(data),
            Estimator::Param => fit_param(data),
            Estimator::ParamGrand => fit_param_grand(data),
            Estimator::EbMm => fit_eb_mm(data),
            Estimator::EbMl => fit_eb_ml(data),
            Estimator::Oracle => {
                let truth = truth.ok_or_else(|| Error::InvalidArgument("the oracle rule needs the true means".into()))?;
                fit_oracle(data, truth)
            }
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Estimator::ALL
            .iter()
            .copied()
            .find(|e| e.name() == key)
            .ok_or_else(|| Error::UnknownEstimator(s.to_string(), Estimator::valid_names()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn conjugate_mappings() {
        let h = HyperParams::from_prior(FamilyKind::Binomial, 2.0, 3.0).unwrap();
        assert_eq!((h.gamma, h.mu), (5.0, 0.4));
        let h = HyperParams::from_prior(FamilyKind::Poisson, 3.0, 0.5).unwrap();
        assert_eq!((h.gamma, h.mu), (2.0, 1.5));
        let h = HyperParams::from_prior(FamilyKind::NegBinomial, 2.0, 5.0).unwrap();
        assert_eq!((h.gamma, h.mu), (4.0, 0.5));
        let h = HyperParams::from_prior(FamilyKind::Gamma { alpha: 2.0 }, 5.0, 3.0).unwrap();
        assert_eq!((h.gamma, h.mu), (2.0, 1.5));
        for family in [
            FamilyKind::Normal,
            FamilyKind::Binomial,
            FamilyKind::Poisson,
            FamilyKind::NegBinomial,
            FamilyKind::Gamma { alpha: 2.0 },
        ] {
            let h = HyperParams::from_prior(family, 3.0, 4.0).unwrap();
            let back = HyperParams::from_rule(family, &ParamRule::new(h.gamma, h.mu)).unwrap();
            assert_relative_eq!(back.alpha, 3.0, max_relative = 1e-12);
            assert_relative_eq!(back.beta_or_lambda, 4.0, max_relative = 1e-12);
        }
        assert!(HyperParams::from_prior(FamilyKind::Ghs { alpha: 1.0 }, 1.0, 1.0).is_err());
    }

    #[test]
    fn estimator_names_round_trip() {
        for e in Estimator::ALL {
            assert_eq!(e.name().parse::<Estimator>().unwrap(), e);
        }
        let err = "bogus".parse::<Estimator>().unwrap_err();
        assert!(err.to_string().contains("eb-ml"));
    }
}
