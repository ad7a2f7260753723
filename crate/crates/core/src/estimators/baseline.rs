use super::{Diagnostics, FitResult, Rule};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::ure::SemiRule;

/// `θ̂ = Y`.
pub fn fit_naive(data: &Dataset) -> Result<FitResult> {
    Ok(FitResult::new(data, Rule::Identity, None, Diagnostics::default()))
}

/// `θ̂ = Ȳ` for every unit.
pub fn fit_grand_mean(data: &Dataset) -> Result<FitResult> {
    let rule = SemiRule::new(vec![1.0; data.len()], data.mean_y());
    Ok(FitResult::new(data, Rule::Semi(rule), None, Diagnostics::default()))
}

/// Positive-part James–Stein for heteroscedastic data, treating `1/τ_i` as
/// the known variances: `θ̂ = μ̂ + c·(Y − μ̂)` with `μ̂` the precision-weighted
/// mean and `c = (1 − (p − 3)/Σ τ_i(Y_i − μ̂)²)⁺`. With `literal` the
/// estimate is `μ̂ + c·Y`. Requires `p ≥ 4`.
pub fn fit_james_stein(data: &Dataset, literal: bool) -> Result<FitResult> {
    let p = data.len();
    if p < 4 {
        return Err(Error::InvalidData(format!("James-Stein needs at least 4 observations, got {p}")));
    }
    let y = data.y();
    let tau = data.tau();
    let total_tau: f64 = tau.iter().sum();
    let mu = y.iter().zip(tau).map(|(y, t)| y * t).sum::<f64>() / total_tau;
    let spread: f64 = y.iter().zip(tau).map(|(y, t)| t * (y - mu).powi(2)).sum();
    let c = if spread > 0.0 {
        (1.0 - (p as f64 - 3.0) / spread).max(0.0)
    } else {
        0.0
    };
    let rule = if literal {
        Rule::ShiftScale { shift: mu, scale: c }
    } else {
        Rule::Semi(SemiRule::new(vec![1.0 - c; p], mu))
    };
    Ok(FitResult::new(
        data,
        rule,
        None,
        Diagnostics {
            evaluations: 1,
            iterations: 0,
            note: Some(format!("shrinkage multiplier {c}")),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilyKind;
    use approx::assert_relative_eq;

    fn normal(y: Vec<f64>, tau: Vec<f64>) -> Dataset {
        Dataset::new(y, tau, FamilyKind::Normal).unwrap()
    }

    #[test]
    fn hand_computed_james_stein() {
        // μ̂ = 2.5, spread = 5, c = 1 − 1/5 = 0.8
        let data = normal(vec![1.0, 2.0, 3.0, 4.0], vec![1.0; 4]);
        let fit = fit_james_stein(&data, false).unwrap();
        let expected = [1.3, 2.1, 2.9, 3.7];
        for (e, x) in fit.estimates.iter().zip(expected) {
            assert_relative_eq!(*e, x, max_relative = 1e-12);
        }
        let literal = fit_james_stein(&data, true).unwrap();
        assert_relative_eq!(literal.estimates[0], 2.5 + 0.8, max_relative = 1e-12);
    }

    #[test]
    fn small_spread_collapses_to_weighted_mean() {
        let data = normal(vec![1.0, 1.1, 0.9, 1.0], vec![1.0, 2.0, 1.0, 1.0]);
        let fit = fit_james_stein(&data, false).unwrap();
        let mu = (1.0 + 2.2 + 0.9 + 1.0) / 5.0;
        for e in &fit.estimates {
            assert_relative_eq!(*e, mu, max_relative = 1e-12);
        }
    }

    #[test]
    fn needs_four_observations() {
        let data = normal(vec![1.0, 2.0, 3.0], vec![1.0; 3]);
        assert!(fit_james_stein(&data, false).is_err());
    }

    #[test]
    fn scale_equivariant() {
        let y = vec![0.3, -1.2, 2.5, 0.7, 1.9];
        let tau = vec![1.0, 4.0, 0.5, 2.0, 3.0];
        let k = 3.0;
        let a = fit_james_stein(&normal(y.clone(), tau.clone()), false).unwrap();
        let scaled = normal(
            y.iter().map(|v| v * k).collect(),
            tau.iter().map(|t| t / (k * k)).collect(),
        );
        let b = fit_james_stein(&scaled, false).unwrap();
        for (x, z) in a.estimates.iter().zip(&b.estimates) {
            assert_relative_eq!(x * k, *z, max_relative = 1e-12);
        }
    }

    #[test]
    fn naive_and_grand_mean() {
        let data = normal(vec![1.0, 3.0], vec![1.0, 1.0]);
        assert_eq!(fit_naive(&data).unwrap().estimates, vec![1.0, 3.0]);
        assert_eq!(fit_grand_mean(&data).unwrap().estimates, vec![2.0, 2.0]);
    }
}
