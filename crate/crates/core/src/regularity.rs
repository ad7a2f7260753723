//! Advisory checks of the finite-sample regularity conditions for each
//! family. Conditions stated on the unknown means use the observations as a
//! proxy; asymptotic growth conditions are reported as statistics only.

use std::fmt;

use crate::dataset::Dataset;
use crate::families::FamilyKind;

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Pass,
    /// Failed; lists the offending indices (empty for family-level failures).
    Fail(Vec<usize>),
    /// Asymptotic condition; only a summary statistic can be reported.
    Info,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub family: FamilyKind,
    pub conditions: Vec<Condition>,
}

impl RegularityReport {
    pub fn passed(&self) -> bool {
        !self.conditions.iter().any(|c| matches!(c.status, Status::Fail(_)))
    }

    pub fn failures(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| matches!(c.status, Status::Fail(_)))
    }
}

impl fmt::Display for RegularityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "family: {}", self.family)?;
        for c in &self.conditions {
            let status = match &c.status {
                Status::Pass => "PASS".to_string(),
                Status::Info => "INFO".to_string(),
                Status::Fail(idx) if idx.is_empty() => "FAIL".to_string(),
                Status::Fail(idx) => {
                    let shown: Vec<String> = idx.iter().take(20).map(|i| i.to_string()).collect();
                    let more = if idx.len() > 20 { ", ..." } else { "" };
                    format!("FAIL at [{}{more}]", shown.join(", "))
                }
            };
            writeln!(f, "{status:<6} {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

fn indices_where(data: &Dataset, pred: impl Fn(f64, f64) -> bool) -> Vec<usize> {
    data.y()
        .iter()
        .zip(data.tau())
        .enumerate()
        .filter(|(_, (&y, &t))| pred(y, t))
        .map(|(i, _)| i)
        .collect()
}

fn from_indices(name: &str, detail: &str, idx: Vec<usize>) -> Condition {
    Condition {
        name: name.to_string(),
        status: if idx.is_empty() { Status::Pass } else { Status::Fail(idx) },
        detail: detail.to_string(),
    }
}

fn info(name: &str, stat_name: &str, value: f64) -> Condition {
    Condition {
        name: name.to_string(),
        status: Status::Info,
        detail: format!("{stat_name} = {value:.6}"),
    }
}

fn mean_of(data: &Dataset, f: impl Fn(f64, f64) -> f64) -> f64 {
    data.y().iter().zip(data.tau()).map(|(&y, &t)| f(y, t)).sum::<f64>() / data.len() as f64
}

/// Evaluates the applicable conditions for the dataset's family.
pub fn check_regularity(data: &Dataset) -> RegularityReport {
    let family = data.family();
    let mut conditions = Vec::new();
    match family {
        FamilyKind::Binomial => {
            conditions.push(from_indices(
                "n_i >= 2 for all i",
                "binomial sample sizes",
                indices_where(data, |_, t| t < 2.0),
            ));
        }
        FamilyKind::Poisson => {
            conditions.push(from_indices("(i) inf tau_i > 0", "convolution parameters", indices_where(data, |_, t| t <= 0.0)));
            conditions.push(from_indices(
                "(i) inf tau_i*theta_i > 0",
                "observed y used as proxy for theta",
                indices_where(data, |y, t| t * y <= 0.0),
            ));
            conditions.push(info("(ii) sum theta_i^3 = O(p)", "mean y^3", mean_of(data, |y, _| y.powi(3))));
        }
        FamilyKind::NegBinomial => {
            conditions.push(from_indices(
                "(i) inf n_i*p_i > 0",
                "observed y used as proxy for theta = p/(1-p)",
                indices_where(data, |y, t| t * y / (1.0 + y) <= 0.0),
            ));
            conditions.push(info("(ii) sum (p_i/(1-p_i))^4 = O(p)", "mean y^4", mean_of(data, |y, _| y.powi(4))));
        }
        FamilyKind::Gamma { alpha } | FamilyKind::Ghs { alpha } => {
            conditions.push(from_indices("(i) inf tau_i > 0", "convolution parameters", indices_where(data, |_, t| t <= 0.0)));
            conditions.push(info(
                "(ii) sum lambda_i^4 = O(p)",
                "mean (y/alpha)^4",
                mean_of(data, |y, _| (y / alpha).powi(4)),
            ));
        }
        FamilyKind::Normal
        | FamilyKind::Laplace
        | FamilyKind::Logistic
        | FamilyKind::StudentT { .. }
        | FamilyKind::UniformLs { .. } => {
            conditions.push(info("(i) (1/p) sum 1/tau_i^2 bounded", "value", mean_of(data, |_, t| 1.0 / (t * t))));
            conditions.push(info("(ii) (1/p) sum theta_i^2/tau_i bounded", "value with y as proxy", mean_of(data, |y, t| y * y / t)));
            conditions.push(info("(iii) (1/p) sum |theta_i|^(2+eps) bounded", "eps = 1, y as proxy", mean_of(data, |y, _| y.abs().powi(3))));
            let (status, detail) = match family {
                FamilyKind::StudentT { df } if df <= 4.0 => (
                    Status::Fail(Vec::new()),
                    format!("t tail index {df} does not exceed 4"),
                ),
                FamilyKind::StudentT { df } => (Status::Pass, format!("t tail index {df} > 4")),
                _ => (Status::Pass, "tails decay faster than any polynomial".to_string()),
            };
            conditions.push(Condition {
                name: "(iv) P(|Z|>t) <= D t^-alpha with alpha > 4".into(),
                status,
                detail,
            });
        }
    }
    RegularityReport { family, conditions }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_single_trials_fail() {
        let d = Dataset::new(vec![0.0, 0.5, 1.0, 0.25], vec![1.0, 2.0, 1.0, 4.0], FamilyKind::Binomial).unwrap();
        let r = check_regularity(&d);
        assert!(!r.passed());
        assert_eq!(r.conditions[0].status, Status::Fail(vec![0, 2]));
    }

    #[test]
    fn clean_poisson_passes() {
        let d = Dataset::new(vec![0.5, 1.0, 2.0], vec![2.0, 3.0, 1.0], FamilyKind::Poisson).unwrap();
        assert!(check_regularity(&d).passed());
        let zeros = Dataset::new(vec![0.0, 1.0], vec![2.0, 3.0], FamilyKind::Poisson).unwrap();
        let r = check_regularity(&zeros);
        assert_eq!(r.conditions[1].status, Status::Fail(vec![0]));
    }

    #[test]
    fn t_tail_condition() {
        let d = Dataset::new(vec![0.1, 0.2], vec![1.0, 2.0], FamilyKind::StudentT { df: 5.0 }).unwrap();
        assert!(check_regularity(&d).passed());
        let d = Dataset::new(vec![0.1, 0.2], vec![1.0, 2.0], FamilyKind::StudentT { df: 3.0 }).unwrap();
        let r = check_regularity(&d);
        assert!(!r.passed());
        assert!(r.to_string().contains("FAIL"));
    }
}
