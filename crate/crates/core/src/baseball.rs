//! Half-season batting prediction: fit on first-half records, score the
//! predictions against the second half on the arcsine scale.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{Estimator, FitOptions};
use crate::families::FamilyKind;

pub const DEFAULT_MIN_N1: u32 = 11;
pub const RECORD_HEADER: &str = "player,pitcher,H1,N1,H2,N2";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerRecord {
    pub player: String,
    #[serde(deserialize_with = "de_flag", serialize_with = "ser_flag")]
    pub pitcher: bool,
    #[serde(rename = "H1")]
    pub h1: u32,
    #[serde(rename = "N1")]
    pub n1: u32,
    #[serde(rename = "H2")]
    pub h2: u32,
    #[serde(rename = "N2")]
    pub n2: u32,
}

fn de_flag<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    let s = String::deserialize(d)?;
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" => Ok(true),
        "0" | "false" | "no" | "n" => Ok(false),
        other => Err(serde::de::Error::custom(format!("invalid pitcher flag '{other}'"))),
    }
}

fn ser_flag<S: serde::Serializer>(v: &bool, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(if *v { "1" } else { "0" })
}

impl PlayerRecord {
    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| Error::InvalidRecord {
            player: self.player.clone(),
            message,
        };
        if self.h1 > self.n1 {
            return Err(bad(format!("H1 = {} exceeds N1 = {}", self.h1, self.n1)));
        }
        if self.h2 > self.n2 {
            return Err(bad(format!("H2 = {} exceeds N2 = {}", self.h2, self.n2)));
        }
        Ok(())
    }
}

/// Parses and validates records from CSV with header `player,pitcher,H1,N1,H2,N2`.
pub fn read_records<R: Read>(input: R) -> Result<Vec<PlayerRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut out = Vec::new();
    for row in reader.deserialize::<PlayerRecord>() {
        let record = row?;
        record.validate()?;
        out.push(record);
    }
    Ok(out)
}

pub fn load_records(path: &Path) -> Result<Vec<PlayerRecord>> {
    read_records(std::fs::File::open(path)?)
}

pub fn write_records<W: Write>(records: &[PlayerRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(RECORD_HEADER.split(','))?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `arcsin √((H + ¼)/(N + ½))`.
pub fn arcsine_transform(hits: u32, at_bats: u32) -> f64 {
    ((hits as f64 + 0.25) / (at_bats as f64 + 0.5)).sqrt().asin()
}

/// Players scored in the second half, as positions in the estimation set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationSet {
    pub index: Vec<usize>,
    pub x2: Vec<f64>,
    pub n2: Vec<f64>,
    estimation_len: usize,
}

/// First-half data on both scales, plus the evaluation set.
#[derive(Debug, Clone)]
pub struct Transformed {
    pub players: Vec<String>,
    /// `y = X1`, `τ = 4·N1`, normal family.
    pub normal: Dataset,
    /// `y = H1/N1`, `τ = N1`, binomial family.
    pub binomial: Dataset,
    pub eval: EvaluationSet,
}

/// Keeps players with `N1 ≥ min_n1` for estimation and scores those that
/// also have `N2 ≥ min_n1`.
pub fn transform(records: &[PlayerRecord], min_n1: u32) -> Result<Transformed> {
    let min_n1 = min_n1.max(1);
    let kept: Vec<&PlayerRecord> = records.iter().filter(|r| r.n1 >= min_n1).collect();
    if kept.is_empty() {
        return Err(Error::InvalidData(format!("no players with N1 >= {min_n1}")));
    }
    let mut eval = EvaluationSet {
        index: Vec::new(),
        x2: Vec::new(),
        n2: Vec::new(),
        estimation_len: kept.len(),
    };
    for (i, r) in kept.iter().enumerate() {
        if r.n2 >= min_n1 {
            eval.index.push(i);
            eval.x2.push(arcsine_transform(r.h2, r.n2));
            eval.n2.push(r.n2 as f64);
        }
    }
    if eval.index.is_empty() {
        return Err(Error::InvalidData(format!("no players with N1 and N2 >= {min_n1}")));
    }
    let normal = Dataset::new(
        kept.iter().map(|r| arcsine_transform(r.h1, r.n1)).collect(),
        kept.iter().map(|r| 4.0 * r.n1 as f64).collect(),
        FamilyKind::Normal,
    )?;
    let binomial = Dataset::new(
        kept.iter().map(|r| r.h1 as f64 / r.n1 as f64).collect(),
        kept.iter().map(|r| r.n1 as f64).collect(),
        FamilyKind::Binomial,
    )?;
    Ok(Transformed {
        players: kept.iter().map(|r| r.player.clone()).collect(),
        normal,
        binomial,
        eval,
    })
}

/// `Σ (X2 − θ̂)² − Σ 1/(4·N2)` over the evaluation set.
pub fn tse(estimates: &[f64], eval: &EvaluationSet) -> Result<f64> {
    if estimates.len() != eval.estimation_len {
        return Err(Error::DimensionMismatch {
            expected: eval.estimation_len,
            actual: estimates.len(),
        });
    }
    Ok(eval
        .index
        .iter()
        .zip(&eval.x2)
        .zip(&eval.n2)
        .map(|((&i, x2), n2)| (x2 - estimates[i]).powi(2) - 1.0 / (4.0 * n2))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    All,
    Pitchers,
    Nonpitchers,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::All, Group::Pitchers, Group::Nonpitchers];

    pub fn name(&self) -> &'static str {
        match self {
            Group::All => "all",
            Group::Pitchers => "pitchers",
            Group::Nonpitchers => "nonpitchers",
        }
    }

    pub fn includes(&self, record: &PlayerRecord) -> bool {
        match self {
            Group::All => true,
            Group::Pitchers => record.pitcher,
            Group::Nonpitchers => !record.pitcher,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Group::ALL
            .into_iter()
            .find(|g| g.name() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown group '{s}' (valid: all, pitchers, nonpitchers)")))
    }
}

/// Estimators fitted on the binomial proportions and mapped to the
/// arcsine scale; the rest are fitted on the transformed data directly.
pub fn fits_binomial_scale(estimator: Estimator) -> bool {
    matches!(
        estimator,
        Estimator::Semi
            | Estimator::SemiGrand
            | Estimator::Param
            | Estimator::ParamGrand
            | Estimator::EbMm
            | Estimator::EbMl
    )
}

/// Arcsine-scale predictions of one estimator for the estimation set.
pub fn predict(estimator: Estimator, data: &Transformed, opts: &FitOptions) -> Result<Vec<f64>> {
    if estimator.needs_truth() {
        return Err(Error::InvalidArgument(format!(
            "{estimator} needs the true means and cannot be evaluated on real data"
        )));
    }
    if fits_binomial_scale(estimator) {
        let fit = estimator.fit(&data.binomial, None, opts)?;
        Ok(fit.estimates.iter().map(|p| p.clamp(0.0, 1.0).sqrt().asin()).collect())
    } else {
        Ok(estimator.fit(&data.normal, None, opts)?.estimates)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub group: Group,
    pub estimator: Estimator,
    pub tse: f64,
    /// `TSE(estimator) / TSE(naive)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub min_n1: u32,
    pub fit: FitOptions,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            min_n1: DEFAULT_MIN_N1,
            fit: FitOptions::default(),
        }
    }
}

/// TSE ratios against the naive predictor, each group fitted separately.
pub fn evaluate(
    records: &[PlayerRecord],
    groups: &[Group],
    estimators: &[Estimator],
    opts: &EvalOptions,
) -> Result<Vec<RatioRow>> {
    let mut rows = Vec::new();
    for &group in groups {
        let subset: Vec<PlayerRecord> = records.iter().filter(|r| group.includes(r)).cloned().collect();
        let data = transform(&subset, opts.min_n1)?;
        let naive = tse(&predict(Estimator::Naive, &data, &opts.fit)?, &data.eval)?;
        for &estimator in estimators {
            let value = tse(&predict(estimator, &data, &opts.fit)?, &data.eval)?;
            rows.push(RatioRow {
                group,
                estimator,
                tse: value,
                ratio: value / naive,
            });
        }
    }
    Ok(rows)
}

/// Writes `group,estimator,tse_ratio` with ratios to 3 decimals.
pub fn write_ratio_table<W: Write>(rows: &[RatioRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["group", "estimator", "tse_ratio"])?;
    for row in rows {
        w.write_record([row.group.name(), row.estimator.name(), &format!("{:.3}", row.ratio)])?;
    }
    w.flush()?;
    Ok(())
}
