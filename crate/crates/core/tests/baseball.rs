use shrinkage_ure::baseball::{evaluate, load_records, EvalOptions, Group};
use shrinkage_ure::Estimator;

fn fixture() -> Vec<shrinkage_ure::baseball::PlayerRecord> {
    load_records(std::path::Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/baseball_synthetic.csv"))).unwrap()
}

/// Independent re-derivation of the normal-scale rows.
fn hand_ratios(pitcher: Option<bool>) -> [f64; 3] {
    let rows: Vec<_> = fixture()
        .into_iter()
        .filter(|r| pitcher.is_none_or(|p| r.pitcher == p) && r.n1 >= 11)
        .collect();
    let x = |h: u32, n: u32| ((h as f64 + 0.25) / (n as f64 + 0.5)).sqrt().asin();
    let x1: Vec<f64> = rows.iter().map(|r| x(r.h1, r.n1)).collect();
    let prec: Vec<f64> = rows.iter().map(|r| 4.0 * r.n1 as f64).collect();
    let n = x1.len() as f64;
    let grand = x1.iter().sum::<f64>() / n;
    let wmean = x1.iter().zip(&prec).map(|(a, b)| a * b).sum::<f64>() / prec.iter().sum::<f64>();
    let spread: f64 = x1.iter().zip(&prec).map(|(a, b)| b * (a - wmean).powi(2)).sum();
    let c = (1.0 - (n - 3.0) / spread).max(0.0);
    let js: Vec<f64> = x1.iter().map(|a| wmean + c * (a - wmean)).collect();
    let score = |est: &dyn Fn(usize) -> f64| -> f64 {
        rows.iter()
            .enumerate()
            .filter(|(_, r)| r.n2 >= 11)
            .map(|(i, r)| (x(r.h2, r.n2) - est(i)).powi(2) - 1.0 / (4.0 * r.n2 as f64))
            .sum()
    };
    let naive = score(&|i| x1[i]);
    [1.0, score(&|_| grand) / naive, score(&|i| js[i]) / naive]
}

#[test]
fn normal_scale_rows_match_hand_computation() {
    let rows = evaluate(
        &fixture(),
        &Group::ALL,
        &[Estimator::Naive, Estimator::GrandMean, Estimator::JamesStein],
        &EvalOptions::default(),
    )
    .unwrap();
    for (g, pitcher) in [(Group::All, None), (Group::Pitchers, Some(true)), (Group::Nonpitchers, Some(false))] {
        let want = hand_ratios(pitcher);
        let got: Vec<f64> = rows.iter().filter(|r| r.group == g).map(|r| r.ratio).collect();
        for (a, b) in got.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{g}: {a} vs {b}");
        }
    }
}

#[test]
fn binomial_scale_estimators_shrink_the_fixture() {
    let rows = evaluate(
        &fixture(),
        &[Group::All],
        &[Estimator::Semi, Estimator::SemiGrand, Estimator::Param, Estimator::ParamGrand],
        &EvalOptions::default(),
    )
    .unwrap();
    for r in rows {
        assert!(r.ratio < 1.0, "{} {}", r.estimator, r.ratio);
    }
}

#[test]
fn oracle_is_rejected() {
    assert!(evaluate(&fixture(), &[Group::All], &[Estimator::Oracle], &EvalOptions::default()).is_err());
}
