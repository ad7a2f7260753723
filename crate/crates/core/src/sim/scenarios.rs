use std::fmt;

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal, Poisson, Uniform};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::families::{sample, FamilyKind, ParamPoint};

/// How `(θ_i, τ_i)` pairs are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    /// A ~ Unif(0.1, 1), θ ~ N(0, 1) independently.
    IndependentNormal,
    /// A ~ Unif(0.1, 1), θ = A.
    LocationEqualsScale,
    /// A ∈ {0.1, 0.5} equally likely; θ | 0.1 ~ N(2, 0.1), θ | 0.5 ~ N(0, 0.5).
    TwoGroups,
    /// τ ~ Poi(3) + 2, θ ~ Beta(1, 1).
    BetaUniform,
    /// τ ~ Poi(3) + 2, θ ~ ½Beta(1, 3) + ½Beta(3, 1).
    BetaMixture,
    /// τ ~ Poi(3) + 2, θ = 1/τ.
    InverseTau,
    /// I ~ Bern(½), τ ~ I·Poi(10) + (1 − I)·Poi(1) + 2, θ ~ I·Beta(1, 3) + (1 − I)·Beta(3, 1).
    BetaGroups,
    /// τ ~ Poi(3) + 2, θ ~ Γ(1, 1).
    GammaExponential,
    /// τ ~ Poi(3) + 2, θ ~ Unif(0.1, 1).
    UniformRate,
    /// I ~ Bern(½), τ as in `BetaGroups`, θ ~ I·Γ(1, 1) + (1 − I)·Γ(5, 1).
    GammaGroups,
}

/// A named simulation setting.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub id: String,
    /// Family assumed by the fitted estimators.
    pub family: FamilyKind,
    /// Family the observations are drawn from; differs from `family` when
    /// the model is misspecified.
    pub sampler: FamilyKind,
    pub generator: Generator,
}

/// One simulated data set with its truth.
#[derive(Debug, Clone)]
pub struct Draw {
    pub theta: Vec<f64>,
    pub data: Dataset,
}

impl fmt::Display for ScenarioSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

const LOCATION_SCALE: [(&str, FamilyKind); 3] = [
    ("laplace", FamilyKind::Laplace),
    ("logistic", FamilyKind::Logistic),
    ("t7", FamilyKind::StudentT { df: 7.0 }),
];

impl ScenarioSpec {
    /// Every registered scenario.
    pub fn all() -> Vec<ScenarioSpec> {
        let mut out = Vec::new();
        for (name, family) in LOCATION_SCALE {
            let nu0 = family.coefficients().nu0;
            for (k, generator) in [
                Generator::IndependentNormal,
                Generator::LocationEqualsScale,
                Generator::TwoGroups,
                Generator::LocationEqualsScale,
            ]
            .into_iter()
            .enumerate()
            {
                let sampler = if k == 3 { FamilyKind::UniformLs { var: nu0 } } else { family };
                out.push(ScenarioSpec {
                    id: format!("{name}-{}", k + 1),
                    family,
                    sampler,
                    generator,
                });
            }
        }
        let binomial = [
            Generator::BetaUniform,
            Generator::BetaMixture,
            Generator::InverseTau,
            Generator::BetaGroups,
        ];
        for (k, generator) in binomial.into_iter().enumerate() {
            out.push(ScenarioSpec {
                id: format!("binomial-ex{}", k + 1),
                family: FamilyKind::Binomial,
                sampler: FamilyKind::Binomial,
                generator,
            });
        }
        let poisson = [
            Generator::GammaExponential,
            Generator::UniformRate,
            Generator::InverseTau,
            Generator::GammaGroups,
        ];
        for (k, generator) in poisson.into_iter().enumerate() {
            out.push(ScenarioSpec {
                id: format!("poisson-ex{}", k + 5),
                family: FamilyKind::Poisson,
                sampler: FamilyKind::Poisson,
                generator,
            });
        }
        out
    }

    pub fn ids() -> Vec<String> {
        Self::all().into_iter().map(|s| s.id).collect()
    }

    pub fn by_id(id: &str) -> Result<ScenarioSpec> {
        let key = id.trim().to_ascii_lowercase();
        Self::all()
            .into_iter()
            .find(|s| s.id == key)
            .ok_or_else(|| Error::UnknownScenario(id.to_string(), Self::ids().join(", ")))
    }

    pub fn is_misspecified(&self) -> bool {
        self.family != self.sampler
    }

    /// Draws one `(θ, τ)` pair.
    pub fn draw_point<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamPoint {
        let unif_a = |rng: &mut R| Uniform::new(0.1, 1.0).unwrap().sample(rng);
        let poi = |lambda: f64, rng: &mut R| Poisson::new(lambda).unwrap().sample(rng);
        let beta = |a: f64, b: f64, rng: &mut R| Beta::new(a, b).unwrap().sample(rng);
        let gamma = |shape: f64, rng: &mut R| Gamma::new(shape, 1.0).unwrap().sample(rng);
        match self.generator {
            Generator::IndependentNormal => {
                let a = unif_a(rng);
                let theta = Normal::new(0.0, 1.0).unwrap().sample(rng);
                ParamPoint::new(theta, 1.0 / a)
            }
            Generator::LocationEqualsScale => {
                let a = unif_a(rng);
                ParamPoint::new(a, 1.0 / a)
            }
            Generator::TwoGroups => {
                let (a, mean) = if rng.random_bool(0.5) { (0.1, 2.0) } else { (0.5, 0.0) };
                let theta = Normal::new(mean, f64::sqrt(a)).unwrap().sample(rng);
                ParamPoint::new(theta, 1.0 / a)
            }
            Generator::BetaUniform | Generator::BetaMixture | Generator::InverseTau | Generator::GammaExponential | Generator::UniformRate => {
                let tau = poi(3.0, rng) + 2.0;
                let theta = match self.generator {
                    Generator::BetaUniform => beta(1.0, 1.0, rng),
                    Generator::BetaMixture => {
                        if rng.random_bool(0.5) {
                            beta(1.0, 3.0, rng)
                        } else {
                            beta(3.0, 1.0, rng)
                        }
                    }
                    Generator::InverseTau => 1.0 / tau,
                    Generator::GammaExponential => gamma(1.0, rng),
                    _ => Uniform::new(0.1, 1.0).unwrap().sample(rng),
                };
                ParamPoint::new(theta, tau)
            }
            Generator::BetaGroups | Generator::GammaGroups => {
                let first = rng.random_bool(0.5);
                let tau = if first { poi(10.0, rng) } else { poi(1.0, rng) } + 2.0;
                let theta = match (self.generator, first) {
                    (Generator::BetaGroups, true) => beta(1.0, 3.0, rng),
                    (Generator::BetaGroups, false) => beta(3.0, 1.0, rng),
                    (_, true) => gamma(1.0, rng),
                    (_, false) => gamma(5.0, rng),
                };
                ParamPoint::new(theta, tau)
            }
        }
    }

    /// Draws `p` units: for each, `(θ, τ)` then `Y`.
    pub fn draw<R: Rng + ?Sized>(&self, p: usize, rng: &mut R) -> Result<Draw> {
        let mut theta = Vec::with_capacity(p);
        let mut tau = Vec::with_capacity(p);
        let mut y = Vec::with_capacity(p);
        for _ in 0..p {
            let point = self.draw_point(rng);
            y.push(sample(self.sampler, point, rng)?);
            theta.push(point.theta);
            tau.push(point.tau);
        }
        Ok(Draw {
            theta,
            data: Dataset::new(y, tau, self.family)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replication_rng;

    #[test]
    fn registry_ids() {
        let ids = ScenarioSpec::ids();
        assert_eq!(ids.len(), 20);
        assert!(ids.contains(&"t7-4".to_string()));
        assert!(ids.contains(&"poisson-ex8".to_string()));
        assert!(ScenarioSpec::by_id("laplace-4").unwrap().is_misspecified());
        assert!(!ScenarioSpec::by_id("laplace-2").unwrap().is_misspecified());
        let err = ScenarioSpec::by_id("nope").unwrap_err().to_string();
        assert!(err.contains("binomial-ex1"));
    }

    #[test]
    fn generator_moments() {
        let n = 200_000;
        let spec = ScenarioSpec::by_id("binomial-ex1").unwrap();
        let mut rng = replication_rng(1, 0, 0);
        let draw = spec.draw(n, &mut rng).unwrap();
        let mean_tau = draw.data.tau().iter().sum::<f64>() / n as f64;
        let mean_theta = draw.theta.iter().sum::<f64>() / n as f64;
        assert!((mean_tau - 5.0).abs() < 0.03, "{mean_tau}");
        assert!((mean_theta - 0.5).abs() < 0.005, "{mean_theta}");

        let spec = ScenarioSpec::by_id("logistic-3").unwrap();
        let draw = spec.draw(n, &mut rng).unwrap();
        let high: Vec<f64> = draw
            .theta
            .iter()
            .zip(draw.data.tau())
            .filter(|(_, &t)| t == 10.0)
            .map(|(th, _)| *th)
            .collect();
        let m = high.iter().sum::<f64>() / high.len() as f64;
        let v = high.iter().map(|x| (x - m).powi(2)).sum::<f64>() / high.len() as f64;
        assert!((m - 2.0).abs() < 0.01 && (v - 0.1).abs() < 0.005, "{m} {v}");

        let spec = ScenarioSpec::by_id("poisson-ex8").unwrap();
        let draw = spec.draw(n, &mut rng).unwrap();
        let mean_theta = draw.theta.iter().sum::<f64>() / n as f64;
        assert!((mean_theta - 3.0).abs() < 0.03, "{mean_theta}");
    }

    #[test]
    fn inverse_tau_truth() {
        let spec = ScenarioSpec::by_id("poisson-ex7").unwrap();
        let draw = spec.draw(50, &mut replication_rng(3, 50, 0)).unwrap();
        for (th, t) in draw.theta.iter().zip(draw.data.tau()) {
            assert_eq!(*th, 1.0 / t);
        }
    }
}
