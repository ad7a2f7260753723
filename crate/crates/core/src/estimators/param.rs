use super::{BlockStats, Diagnostics, FitResult, Objective, ObjectiveKind, Rule};
use crate::dataset::Dataset;
use crate::error::Result;
use crate::isotonic::TauBlocks;
use crate::optim::golden_section;
use crate::ure::{shrinkage_factor, ure_param, ure_param_grand, ParamRule};

/// Points of the `t = γ/(1+γ)` grid on `[0, 1]`.
pub const GAMMA_GRID_POINTS: usize = 1001;

pub(crate) fn gamma_of(t: f64) -> f64 {
    if t >= 1.0 {
        f64::INFINITY
    } else {
        t / (1.0 - t)
    }
}

pub(crate) struct GammaMin {
    pub gamma: f64,
    pub evaluations: usize,
}

/// Minimizes `f(γ)` over `[0, ∞]` by a grid in `t = γ/(1+γ)` and golden
/// refinement of the best cell. Ties go to the larger γ.
pub(crate) fn search_gamma<F: FnMut(f64) -> f64>(mut f: F) -> GammaMin {
    let n = GAMMA_GRID_POINTS - 1;
    let mut best_k = 0;
    let mut best = f64::INFINITY;
    for k in 0..=n {
        let v = f(gamma_of(k as f64 / n as f64));
        if v <= best {
            best = v;
            best_k = k;
        }
    }
    let mut t = best_k as f64 / n as f64;
    let a = best_k.saturating_sub(1) as f64 / n as f64;
    let b = (best_k + 1).min(n) as f64 / n as f64;
    let line = golden_section(|t| f(gamma_of(t)), a, b, 1e-8);
    if line.value < best {
        t = line.x;
    }
    GammaMin {
        gamma: gamma_of(t),
        evaluations: n + 1 + line.evaluations,
    }
}

/// Location minimizing `Σ b_i²(v_i − μ)²` over the block summaries, or
/// `None` when every factor is zero.
pub(crate) fn weighted_location(stats: &BlockStats, gamma: f64) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..stats.len() {
        let b = shrinkage_factor(gamma, stats.tau[k]);
        let c = b * b * stats.n[k];
        num += c * stats.mean[k];
        den += c;
    }
    (den > 0.0).then(|| num / den)
}

/// Parametric rule with free location: minimizes URE over `(γ, μ)`,
/// profiling μ in closed form.
pub fn fit_param(data: &Dataset) -> Result<FitResult> {
    let s = data.variance_terms()?;
    let stats = BlockStats::new(&TauBlocks::new(data.tau()), data.y(), &s);
    let (lo, hi) = data.location_bounds();
    let fallback = data.mean_y().clamp(lo, hi);
    let p = data.len() as f64;
    let location = |gamma: f64| {
        weighted_location(&stats, gamma)
            .map(|m| m.clamp(lo, hi))
            .unwrap_or(fallback)
    };
    let found = search_gamma(|gamma| {
        let mu = location(gamma);
        let mut total = 0.0;
        for k in 0..stats.len() {
            let b = shrinkage_factor(gamma, stats.tau[k]);
            total += b * b * stats.sq_dev(k, mu) + (1.0 - 2.0 * b) * stats.extra[k];
        }
        total / p
    });
    let rule = ParamRule::new(found.gamma, location(found.gamma));
    let value = ure_param(data, &rule)?;
    Ok(FitResult::new(
        data,
        Rule::Param(rule),
        Some(Objective {
            kind: ObjectiveKind::UreParam,
            value,
        }),
        Diagnostics {
            evaluations: found.evaluations,
            iterations: 0,
            note: None,
        },
    ))
}

/// Parametric rule shrinking toward the grand mean: a one-dimensional
/// search over γ.
pub fn fit_param_grand(data: &Dataset) -> Result<FitResult> {
    let s = data.variance_terms()?;
    let stats = BlockStats::new(&TauBlocks::new(data.tau()), data.y(), &s);
    let p = data.len() as f64;
    let ybar = data.mean_y();
    let keep = 1.0 - 1.0 / p;
    let found = search_gamma(|gamma| {
        let mut total = 0.0;
        for k in 0..stats.len() {
            let b = shrinkage_factor(gamma, stats.tau[k]);
            total += b * b * stats.sq_dev(k, ybar) + (1.0 - 2.0 * keep * b) * stats.extra[k];
        }
        total / p
    });
    let rule = ParamRule::new(found.gamma, ybar);
    let value = ure_param_grand(data, found.gamma)?;
    Ok(FitResult::new(
        data,
        Rule::Param(rule),
        Some(Objective {
            kind: ObjectiveKind::UreParamGrand,
            value,
        }),
        Diagnostics {
            evaluations: found.evaluations,
            iterations: 0,
            note: None,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilyKind;
    use proptest::prelude::*;
    use shrinkage_ure_oracles as oracles;

    fn param_rule(fit: &FitResult) -> ParamRule {
        match fit.rule {
            Rule::Param(r) => r,
            ref other => panic!("unexpected rule {other:?}"),
        }
    }

    #[test]
    fn all_equal_data_prefer_infinite_gamma() {
        let data = Dataset::new(vec![0.0; 3], vec![2.0, 3.0, 4.0], FamilyKind::Binomial).unwrap();
        assert!(param_rule(&fit_param_grand(&data).unwrap()).gamma.is_infinite());
        assert!(param_rule(&fit_param(&data).unwrap()).gamma.is_infinite());
        let single = Dataset::new(vec![1.5], vec![2.0], FamilyKind::Poisson).unwrap();
        assert!(param_rule(&fit_param_grand(&single).unwrap()).gamma.is_infinite());
    }

    #[test]
    fn gamma_grid_endpoints() {
        assert_eq!(gamma_of(0.0), 0.0);
        assert!(gamma_of(1.0).is_infinite());
        assert_eq!(gamma_of(0.5), 1.0);
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..=6).prop_flat_map(|p| {
            (
                proptest::collection::vec(0.0f64..3.0, p),
                proptest::collection::vec(1u32..=8, p),
            )
                .prop_map(|(y, t)| (y, t.into_iter().map(f64::from).collect()))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn param_beats_grid_oracle((y, tau) in instance()) {
            let data = Dataset::new(y.clone(), tau.clone(), FamilyKind::Poisson).unwrap();
            let s = data.variance_terms().unwrap();
            let (lo, hi) = data.location_bounds();
            let fit = fit_param(&data).unwrap();
            let oracle = oracles::param_grid_min(&y, &tau, &s, lo, hi, 0.005, 0.01);
            let got = fit.objective.unwrap().value;
            prop_assert!(got <= oracle + 1e-9 * (1.0 + oracle.abs()), "{} > {}", got, oracle);
        }

        #[test]
        fn param_grand_beats_grid_oracle((y, tau) in instance()) {
            let data = Dataset::new(y.clone(), tau.clone(), FamilyKind::Poisson).unwrap();
            let s = data.variance_terms().unwrap();
            let fit = fit_param_grand(&data).unwrap();
            let oracle = oracles::param_grand_grid_min(&y, &tau, &s, 0.001);
            let got = fit.objective.unwrap().value;
            prop_assert!(got <= oracle + 1e-9 * (1.0 + oracle.abs()), "{} > {}", got, oracle);
        }
    }
}
