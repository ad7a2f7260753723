use crate::error::{Error, Result};
use crate::families::{unbiased_variance_term, FamilyKind};
use crate::numeric::csum;

/// Tolerance on `y·τ` being integral for binomial data.
pub const BINOMIAL_INTEGRALITY_TOL: f64 = 1e-9;

/// Observations `Y_i` with their convolution parameters `τ_i`, tagged with
/// the family that supplies the variance function.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    tau: Vec<f64>,
    family: FamilyKind,
}

impl Dataset {
    pub fn new(y: Vec<f64>, tau: Vec<f64>, family: FamilyKind) -> Result<Self> {
        family.validate()?;
        if y.is_empty() {
            return Err(Error::InvalidData("dataset must contain at least one observation".into()));
        }
        if y.len() != tau.len() {
            return Err(Error::DimensionMismatch {
                expected: y.len(),
                actual: tau.len(),
            });
        }
        let domain = family.domain();
        for (i, (&yi, &ti)) in y.iter().zip(&tau).enumerate() {
            if !(ti > 0.0 && ti.is_finite()) {
                return Err(Error::InvalidData(format!("tau[{i}] = {ti} must be positive and finite")));
            }
            if !yi.is_finite() {
                return Err(Error::InvalidData(format!("y[{i}] = {yi} is not finite")));
            }
            if !domain.contains(yi) {
                return Err(Error::InvalidData(format!("y[{i}] = {yi} outside the mean space of {family}")));
            }
            if family.integer_tau() && ti.fract() != 0.0 {
                return Err(Error::InvalidData(format!("tau[{i}] = {ti} must be an integer for {family}")));
            }
            if family == FamilyKind::Binomial {
                let count = yi * ti;
                if (count - count.round()).abs() > BINOMIAL_INTEGRALITY_TOL {
                    return Err(Error::InvalidData(format!(
                        "y[{i}]·tau[{i}] = {count} is not an integer count"
                    )));
                }
            }
        }
        Ok(Self { y, tau, family })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn family(&self) -> FamilyKind {
        self.family
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Unweighted grand mean Ȳ.
    pub fn mean_y(&self) -> f64 {
        csum(self.y.iter().copied()) / self.len() as f64
    }

    pub fn max_abs_y(&self) -> f64 {
        self.y.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Admissible shrinkage locations: `[-max|Y|, max|Y|] ∩ Θ`.
    pub fn location_bounds(&self) -> (f64, f64) {
        let m = self.max_abs_y();
        let d = self.family.domain();
        (d.clamp(-m), d.clamp(m))
    }

    /// `V(Y_i)/(τ_i + ν₂)` for every observation.
    pub fn variance_terms(&self) -> Result<Vec<f64>> {
        self.y
            .iter()
            .zip(&self.tau)
            .map(|(&y, &t)| unbiased_variance_term(self.family, y, t))
            .collect()
    }

    /// Same observations re-tagged with another family (used when the data
    /// were drawn from a sampler different from the assumed model).
    pub fn with_family(&self, family: FamilyKind) -> Result<Self> {
        Dataset::new(self.y.clone(), self.tau.clone(), family)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Dataset::new(vec![], vec![], FamilyKind::Normal).is_err());
        assert!(Dataset::new(vec![1.0], vec![1.0, 2.0], FamilyKind::Normal).is_err());
        assert!(Dataset::new(vec![1.0], vec![0.0], FamilyKind::Normal).is_err());
        assert!(Dataset::new(vec![f64::NAN], vec![1.0], FamilyKind::Normal).is_err());
        assert!(Dataset::new(vec![1.2], vec![5.0], FamilyKind::Binomial).is_err());
        assert!(Dataset::new(vec![0.3], vec![5.0], FamilyKind::Binomial).is_err());
        assert!(Dataset::new(vec![0.4], vec![5.0], FamilyKind::Binomial).is_ok());
        // decimal text like 0.333333333333 with tau = 3 is accepted
        assert!(Dataset::new(vec![1.0 / 3.0], vec![3.0], FamilyKind::Binomial).is_ok());
        assert!(Dataset::new(vec![0.5], vec![2.5], FamilyKind::NegBinomial).is_err());
        assert!(Dataset::new(vec![-0.5], vec![2.0], FamilyKind::Poisson).is_err());
        assert!(Dataset::new(vec![-0.5], vec![2.0], FamilyKind::Laplace).is_ok());
    }

    #[test]
    fn location_bounds_respect_mean_space() {
        let d = Dataset::new(vec![0.2, 0.8], vec![5.0, 5.0], FamilyKind::Binomial).unwrap();
        assert_eq!(d.location_bounds(), (0.0, 0.8));
        let d = Dataset::new(vec![-3.0, 1.0], vec![1.0, 1.0], FamilyKind::Normal).unwrap();
        assert_eq!(d.location_bounds(), (-3.0, 3.0));
    }
}
