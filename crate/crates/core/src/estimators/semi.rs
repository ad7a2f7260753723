use super::{BlockStats, Diagnostics, FitResult, Objective, ObjectiveKind, Rule};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::isotonic::{pava_box, solve_monotone, MonotoneProblem, TauBlocks};
use crate::optim::golden_section;
use crate::ure::{ure_grand, ure_semi, SemiRule};

pub const DEFAULT_MU_GRID: usize = 201;
const MAX_POLISH: usize = 100;

/// Profiled URE for a fixed location: optimal block factors and the value.
struct Profile<'a> {
    stats: &'a BlockStats,
    p: f64,
    w: Vec<f64>,
}

impl Profile<'_> {
    fn solve(&mut self, mu: f64) -> (f64, Vec<f64>) {
        for k in 0..self.stats.len() {
            self.w[k] = self.stats.sq_dev(k, mu);
        }
        let b = pava_box(&self.w, &self.stats.extra);
        let mut total = 0.0;
        for k in 0..b.len() {
            total += self.w[k] * b[k] * b[k] + (1.0 - 2.0 * b[k]) * self.stats.extra[k];
        }
        (total / self.p, b)
    }

    fn value(&mut self, mu: f64) -> f64 {
        self.solve(mu).0
    }
}

/// Semiparametric rule: minimizes URE(b, μ) over monotone `b` and the
/// location range, profiling `b` on a μ grid, refining the best cell and
/// alternating closed-form location updates.
pub fn fit_semi(data: &Dataset, mu_grid_size: usize) -> Result<FitResult> {
    if mu_grid_size == 0 {
        return Err(Error::InvalidArgument("mu grid size must be positive".into()));
    }
    let s = data.variance_terms()?;
    let blocks = TauBlocks::new(data.tau());
    let stats = BlockStats::new(&blocks, data.y(), &s);
    let mut profile = Profile {
        stats: &stats,
        p: data.len() as f64,
        w: vec![0.0; stats.len()],
    };
    let (lo, hi) = data.location_bounds();
    let mut evaluations = 0;

    let grid: Vec<f64> = if mu_grid_size == 1 || hi <= lo {
        vec![0.5 * (lo + hi)]
    } else {
        let step = (hi - lo) / (mu_grid_size - 1) as f64;
        (0..mu_grid_size)
            .map(|j| if j + 1 == mu_grid_size { hi } else { lo + step * j as f64 })
            .collect()
    };
    let mut best_j = 0;
    let mut best = f64::INFINITY;
    for (j, &mu) in grid.iter().enumerate() {
        let v = profile.value(mu);
        evaluations += 1;
        if v < best {
            best = v;
            best_j = j;
        }
    }
    let mut mu = grid[best_j];

    if grid.len() > 1 {
        let a = grid[best_j.saturating_sub(1)];
        let b = grid[(best_j + 1).min(grid.len() - 1)];
        let line = golden_section(|m| profile.value(m), a, b, 1e-10);
        evaluations += line.evaluations;
        if line.value < best {
            best = line.value;
            mu = line.x;
        }
    }

    let (_, mut b) = profile.solve(mu);
    for _ in 0..MAX_POLISH {
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..stats.len() {
            let c = b[k] * b[k] * stats.n[k];
            num += c * stats.mean[k];
            den += c;
        }
        if den <= 0.0 {
            break;
        }
        let candidate = (num / den).clamp(lo, hi);
        let (v, nb) = profile.solve(candidate);
        evaluations += 1;
        if !(v < best) {
            break;
        }
        best = v;
        mu = candidate;
        b = nb;
    }

    let w: Vec<f64> = data.y().iter().map(|y| (y - mu).powi(2)).collect();
    let b = solve_monotone(&MonotoneProblem::new(w, s, data.tau())?);
    let rule = SemiRule::new(b, mu);
    let value = ure_semi(data, &rule)?;
    Ok(FitResult::new(
        data,
        Rule::Semi(rule),
        Some(Objective {
            kind: ObjectiveKind::Ure,
            value,
        }),
        Diagnostics {
            evaluations,
            iterations: 0,
            note: None,
        },
    ))
}

/// Semiparametric rule shrinking toward the grand mean: a single monotone
/// solve with weights `(Y − Ȳ)²` and scaled variance terms.
pub fn fit_semi_grand(data: &Dataset) -> Result<FitResult> {
    let p = data.len() as f64;
    let ybar = data.mean_y();
    let keep = 1.0 - 1.0 / p;
    let w: Vec<f64> = data.y().iter().map(|y| (y - ybar).powi(2)).collect();
    let s: Vec<f64> = data.variance_terms()?.into_iter().map(|v| keep * v).collect();
    let b = solve_monotone(&MonotoneProblem::new(w, s, data.tau())?);
    let value = ure_grand(data, &b)?;
    Ok(FitResult::new(
        data,
        Rule::Semi(SemiRule::new(b, ybar)),
        Some(Objective {
            kind: ObjectiveKind::UreGrand,
            value,
        }),
        Diagnostics {
            evaluations: 1,
            iterations: 0,
            note: None,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilyKind;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use shrinkage_ure_oracles as oracles;

    fn semi_rule(fit: &FitResult) -> &SemiRule {
        match &fit.rule {
            Rule::Semi(r) => r,
            other => panic!("unexpected rule {other:?}"),
        }
    }

    #[test]
    fn single_observation_matches_grid() {
        let data = Dataset::new(vec![0.4], vec![5.0], FamilyKind::Binomial).unwrap();
        let fit = fit_semi(&data, DEFAULT_MU_GRID).unwrap();
        let s = data.variance_terms().unwrap();
        let (lo, hi) = data.location_bounds();
        let mut best = f64::INFINITY;
        for i in 0..=1000 {
            let b = i as f64 / 1000.0;
            for j in 0..=1000 {
                let mu = lo + (hi - lo) * j as f64 / 1000.0;
                let v = b * b * (0.4 - mu).powi(2) + (1.0 - 2.0 * b) * s[0];
                best = best.min(v);
            }
        }
        let got = fit.objective.unwrap().value;
        assert!(got <= best + 1e-9, "{got} vs grid {best}");
    }

    #[test]
    fn all_equal_data_shrink_fully() {
        let data = Dataset::new(vec![2.0; 4], vec![1.0, 2.0, 3.0, 4.0], FamilyKind::Poisson).unwrap();
        let fit = fit_semi(&data, DEFAULT_MU_GRID).unwrap();
        let rule = semi_rule(&fit);
        assert!(rule.b.iter().all(|&b| b == 1.0));
        for e in &fit.estimates {
            assert_abs_diff_eq!(*e, 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn grand_single_observation_is_identity() {
        let data = Dataset::new(vec![0.7], vec![3.0], FamilyKind::Normal).unwrap();
        let fit = fit_semi_grand(&data).unwrap();
        assert_eq!(fit.estimates, vec![0.7]);
    }

    #[test]
    fn grid_size_zero_rejected() {
        let data = Dataset::new(vec![0.7], vec![3.0], FamilyKind::Normal).unwrap();
        assert!(fit_semi(&data, 0).is_err());
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..=4).prop_flat_map(|p| {
            (
                proptest::collection::vec(0.0f64..3.0, p),
                proptest::collection::vec(2u32..=6, p),
            )
                .prop_map(|(y, t)| (y, t.into_iter().map(f64::from).collect()))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn semi_beats_grid_oracle((y, tau) in instance()) {
            let data = Dataset::new(y.clone(), tau.clone(), FamilyKind::Poisson).unwrap();
            let s = data.variance_terms().unwrap();
            let (lo, hi) = data.location_bounds();
            let fit = fit_semi(&data, DEFAULT_MU_GRID).unwrap();
            let oracle = oracles::semi_grid_min(&y, &tau, &s, lo, hi, 0.02);
            let got = fit.objective.unwrap().value;
            prop_assert!(got <= oracle + 1e-6 * (1.0 + oracle.abs()), "{} > {}", got, oracle);
            let rule = semi_rule(&fit);
            for i in 0..y.len() {
                for j in 0..y.len() {
                    if tau[i] >= tau[j] {
                        prop_assert!(rule.b[i] <= rule.b[j]);
                    }
                }
            }
        }

        #[test]
        fn semi_dominates_param((y, tau) in instance()) {
            let data = Dataset::new(y, tau, FamilyKind::Poisson).unwrap();
            let semi = fit_semi(&data, DEFAULT_MU_GRID).unwrap().objective.unwrap().value;
            let param = super::super::fit_param(&data).unwrap().objective.unwrap().value;
            prop_assert!(semi <= param + 1e-9, "{} > {}", semi, param);
        }

        #[test]
        fn grand_beats_grid_oracle((y, tau) in instance()) {
            let data = Dataset::new(y.clone(), tau.clone(), FamilyKind::Poisson).unwrap();
            let s = data.variance_terms().unwrap();
            let fit = fit_semi_grand(&data).unwrap();
            let oracle = oracles::semi_grand_grid_min(&y, &tau, &s, 0.01);
            let got = fit.objective.unwrap().value;
            prop_assert!(got <= oracle + 1e-9 * (1.0 + oracle.abs()));
        }
    }
}
