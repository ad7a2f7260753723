//! Unbiased risk estimates for the shrinkage rules
//! `θ̂_i = (1 − b_i)·Y_i + b_i·μ`.
//!
//! Four objectives are provided: free location (`ure_semi`), grand-mean
//! location (`ure_grand`), and their parametric counterparts where
//! `b_i = γ/(τ_i + γ)` (`ure_param`, `ure_param_grand`). All sums are
//! compensated.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numeric::csum;

/// Shrinkage factors `b` with a location `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiRule {
    pub b: Vec<f64>,
    pub mu: f64,
}

impl SemiRule {
    pub fn new(b: Vec<f64>, mu: f64) -> Self {
        Self { b, mu }
    }

    /// `(1 − b_i)·y_i + b_i·μ`.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.b)
            .map(|(&y, &b)| (1.0 - b) * y + b * self.mu)
            .collect()
    }
}

/// Conjugate-form rule `τ/(τ+γ)·Y + γ/(τ+γ)·μ`; `gamma = ∞` shrinks fully.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRule {
    pub gamma: f64,
    pub mu: f64,
}

impl ParamRule {
    pub fn new(gamma: f64, mu: f64) -> Self {
        Self { gamma, mu }
    }

    /// Shrinkage factor `γ/(τ+γ)` for one τ.
    #[inline]
    pub fn shrinkage(&self, tau: f64) -> f64 {
        shrinkage_factor(self.gamma, tau)
    }

    pub fn induced_b(&self, tau: &[f64]) -> Vec<f64> {
        tau.iter().map(|&t| self.shrinkage(t)).collect()
    }

    pub fn to_semi(&self, tau: &[f64]) -> SemiRule {
        SemiRule::new(self.induced_b(tau), self.mu)
    }

    pub fn apply(&self, y: &[f64], tau: &[f64]) -> Vec<f64> {
        self.to_semi(tau).apply(y)
    }
}

/// `γ/(τ+γ)`, equal to 1 for `γ = ∞`.
#[inline]
pub fn shrinkage_factor(gamma: f64, tau: f64) -> f64 {
    if gamma.is_infinite() {
        1.0
    } else {
        gamma / (tau + gamma)
    }
}

fn check_len(data: &Dataset, n: usize) -> Result<()> {
    if n != data.len() {
        return Err(Error::DimensionMismatch {
            expected: data.len(),
            actual: n,
        });
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::Domain(format!("gamma = {gamma} must be >= 0")));
    }
    Ok(())
}

/// `URE(b, μ) = (1/p) Σ [b_i²(Y_i − μ)² + (1 − 2b_i)·V(Y_i)/(τ_i + ν₂)]`.
pub fn ure_semi(data: &Dataset, rule: &SemiRule) -> Result<f64> {
    check_len(data, rule.b.len())?;
    let s = data.variance_terms()?;
    let mu = rule.mu;
    let total = csum(
        data.y()
            .iter()
            .zip(&rule.b)
            .zip(&s)
            .map(|((&y, &b), &s)| b * b * (y - mu) * (y - mu) + (1.0 - 2.0 * b) * s),
    );
    Ok(total / data.len() as f64)
}

/// `URE^G(b) = (1/p) Σ [b_i²(Y_i − Ȳ)² + (1 − 2(1 − 1/p)b_i)·V(Y_i)/(τ_i + ν₂)]`.
pub fn ure_grand(data: &Dataset, b: &[f64]) -> Result<f64> {
    check_len(data, b.len())?;
    let s = data.variance_terms()?;
    let p = data.len() as f64;
    let ybar = data.mean_y();
    let keep = 1.0 - 1.0 / p;
    let total = csum(
        data.y()
            .iter()
            .zip(b)
            .zip(&s)
            .map(|((&y, &b), &s)| b * b * (y - ybar) * (y - ybar) + (1.0 - 2.0 * keep * b) * s),
    );
    Ok(total / p)
}

/// `URE^P(γ, μ) = (1/p) Σ [γ²/(τ_i+γ)²·(Y_i − μ)² + (τ_i − γ)/(τ_i + γ)·V(Y_i)/(τ_i + ν₂)]`,
/// with `γ = ∞` taken as the limit.
pub fn ure_param(data: &Dataset, rule: &ParamRule) -> Result<f64> {
    check_gamma(rule.gamma)?;
    let s = data.variance_terms()?;
    let (gamma, mu) = (rule.gamma, rule.mu);
    let total = csum(data.y().iter().zip(data.tau()).zip(&s).map(|((&y, &t), &s)| {
        if gamma.is_infinite() {
            (y - mu) * (y - mu) - s
        } else {
            let r = gamma / (t + gamma);
            r * r * (y - mu) * (y - mu) + (t - gamma) / (t + gamma) * s
        }
    }));
    Ok(total / data.len() as f64)
}

/// `URE^PG(γ) = (1/p) Σ [γ²/(τ_i+γ)²·(Y_i − Ȳ)² + (1 − 2(1 − 1/p)·γ/(τ_i+γ))·V(Y_i)/(τ_i + ν₂)]`.
pub fn ure_param_grand(data: &Dataset, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let s = data.variance_terms()?;
    let p = data.len() as f64;
    let ybar = data.mean_y();
    let keep = 1.0 - 1.0 / p;
    let total = csum(data.y().iter().zip(data.tau()).zip(&s).map(|((&y, &t), &s)| {
        let r = shrinkage_factor(gamma, t);
        r * r * (y - ybar) * (y - ybar) + (1.0 - 2.0 * keep * r) * s
    }));
    Ok(total / p)
}

/// Average squared-error loss `(1/p) Σ (θ̂_i − θ_i)²`.
pub fn squared_error_loss(estimates: &[f64], theta: &[f64]) -> Result<f64> {
    if estimates.len() != theta.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            actual: estimates.len(),
        });
    }
    Ok(csum(estimates.iter().zip(theta).map(|(e, t)| (e - t) * (e - t))) / theta.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilyKind;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn binom() -> Dataset {
        Dataset::new(vec![0.5, 0.25, 0.75, 0.0], vec![2.0, 4.0, 4.0, 3.0], FamilyKind::Binomial).unwrap()
    }

    fn mean_s(d: &Dataset) -> f64 {
        d.variance_terms().unwrap().iter().sum::<f64>() / d.len() as f64
    }

    #[test]
    fn no_shrinkage_cases() {
        let d = binom();
        let expect = mean_s(&d);
        assert_relative_eq!(ure_semi(&d, &SemiRule::new(vec![0.0; 4], 0.3)).unwrap(), expect, max_relative = 1e-15);
        assert_relative_eq!(ure_grand(&d, &[0.0; 4]).unwrap(), expect, max_relative = 1e-15);
        assert_relative_eq!(ure_param(&d, &ParamRule::new(0.0, 0.9)).unwrap(), expect, max_relative = 1e-15);
        assert_relative_eq!(ure_param_grand(&d, 0.0).unwrap(), expect, max_relative = 1e-15);
    }

    #[test]
    fn full_shrinkage_cases() {
        let d = binom();
        let mu = 0.4;
        let s = d.variance_terms().unwrap();
        let expect = d.y().iter().zip(&s).map(|(y, s)| (y - mu) * (y - mu) - s).sum::<f64>() / 4.0;
        let full = ure_semi(&d, &SemiRule::new(vec![1.0; 4], mu)).unwrap();
        assert_relative_eq!(full, expect, max_relative = 1e-14);
        assert_relative_eq!(ure_param(&d, &ParamRule::new(f64::INFINITY, mu)).unwrap(), full, max_relative = 1e-14);
    }

    #[test]
    fn grand_single_observation() {
        let d = Dataset::new(vec![0.25], vec![4.0], FamilyKind::Binomial).unwrap();
        let base = 0.25 * 0.75 / 3.0;
        for b in [0.0, 0.3, 1.0] {
            assert_relative_eq!(ure_grand(&d, &[b]).unwrap(), base, max_relative = 1e-15);
        }
    }

    #[test]
    fn errors() {
        let d = binom();
        assert!(matches!(ure_semi(&d, &SemiRule::new(vec![0.0; 3], 0.0)), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(ure_param(&d, &ParamRule::new(-1.0, 0.0)), Err(Error::Domain(_))));
        let single = Dataset::new(vec![1.0], vec![1.0], FamilyKind::Binomial).unwrap();
        assert!(matches!(ure_grand(&single, &[0.5]), Err(Error::Domain(_))));
    }

    fn dataset() -> impl Strategy<Value = Dataset> {
        (1usize..12).prop_flat_map(|p| {
            (prop::collection::vec(-5.0..5.0f64, p), prop::collection::vec(0.1..20.0f64, p))
                .prop_map(|(y, tau)| Dataset::new(y, tau, FamilyKind::Ghs { alpha: 1.5 }).unwrap())
        })
    }

    proptest! {
        #[test]
        fn parametric_matches_induced_semi(d in dataset(), t in 0.0..1.0f64, mu in -5.0..5.0f64) {
            let gamma = t / (1.0 - t);
            let rule = ParamRule::new(gamma, mu);
            let a = ure_param(&d, &rule).unwrap();
            let b = ure_semi(&d, &rule.to_semi(d.tau())).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            let a = ure_param_grand(&d, gamma).unwrap();
            let b = ure_grand(&d, &rule.induced_b(d.tau())).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
