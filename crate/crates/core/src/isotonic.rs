//! Box-constrained isotonic quadratic subproblem.
//!
//! Minimizes `Σ_i (w_i b_i² − 2 s_i b_i)` over `b ∈ [0,1]^p` subject to
//! `τ_i ≥ τ_j ⟹ b_i ≤ b_j`. Indices are ordered by τ descending; ties in τ
//! form one block sharing a single value. The solver is pool-adjacent-
//! violators where each pooled block takes the minimizer of its aggregated
//! quadratic over `[0,1]`, which handles zero-weight blocks exactly.

use crate::error::{Error, Result};

/// Ordering of indices by τ descending (stable) and the runs of equal τ.
#[derive(Debug, Clone, PartialEq)]
pub struct TauBlocks {
    order: Vec<usize>,
    /// `starts[k]..starts[k+1]` indexes `order` for block k.
    starts: Vec<usize>,
    block_tau: Vec<f64>,
    block_of: Vec<usize>,
}

impl TauBlocks {
    pub fn new(tau: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..tau.len()).collect();
        order.sort_by(|&a, &b| tau[b].total_cmp(&tau[a]));
        let mut starts = Vec::new();
        let mut block_tau = Vec::new();
        let mut block_of = vec![0; tau.len()];
        for (pos, &i) in order.iter().enumerate() {
            if block_tau.last() != Some(&tau[i]) {
                starts.push(pos);
                block_tau.push(tau[i]);
            }
            block_of[i] = block_tau.len() - 1;
        }
        starts.push(order.len());
        Self {
            order,
            starts,
            block_tau,
            block_of,
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn num_blocks(&self) -> usize {
        self.block_tau.len()
    }

    /// Indices sorted by τ descending.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Original indices belonging to block `k`.
    pub fn block(&self, k: usize) -> &[usize] {
        &self.order[self.starts[k]..self.starts[k + 1]]
    }

    pub fn block_tau(&self) -> &[f64] {
        &self.block_tau
    }

    /// Block index of every original index.
    pub fn block_of(&self) -> &[usize] {
        &self.block_of
    }

    /// Sums `values` within each block.
    pub fn aggregate(&self, values: &[f64]) -> Vec<f64> {
        (0..self.num_blocks())
            .map(|k| self.block(k).iter().map(|&i| values[i]).sum())
            .collect()
    }

    /// Broadcasts per-block values back to the original indexing.
    pub fn expand(&self, block_values: &[f64]) -> Vec<f64> {
        self.block_of.iter().map(|&k| block_values[k]).collect()
    }
}

/// One instance of the monotone quadratic subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneProblem {
    w: Vec<f64>,
    s: Vec<f64>,
    blocks: TauBlocks,
}

impl MonotoneProblem {
    pub fn new(w: Vec<f64>, s: Vec<f64>, tau: &[f64]) -> Result<Self> {
        if w.len() != s.len() {
            return Err(Error::DimensionMismatch {
                expected: w.len(),
                actual: s.len(),
            });
        }
        if w.len() != tau.len() {
            return Err(Error::DimensionMismatch {
                expected: w.len(),
                actual: tau.len(),
            });
        }
        if w.is_empty() {
            return Err(Error::InvalidArgument("monotone problem needs at least one index".into()));
        }
        if let Some(i) = w.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument(format!("weight w[{i}] = {} must be finite and >= 0", w[i])));
        }
        if let Some(i) = s.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("linear term s[{i}] = {} must be finite", s[i])));
        }
        Ok(Self {
            w,
            s,
            blocks: TauBlocks::new(tau),
        })
    }

    pub fn blocks(&self) -> &TauBlocks {
        &self.blocks
    }

    /// `Σ (w_i b_i² − 2 s_i b_i)`.
    pub fn objective(&self, b: &[f64]) -> f64 {
        self.w
            .iter()
            .zip(&self.s)
            .zip(b)
            .map(|((w, s), b)| w * b * b - 2.0 * s * b)
            .sum()
    }
}

/// Solves the monotone problem exactly.
pub fn solve_monotone(problem: &MonotoneProblem) -> Vec<f64> {
    let blocks = &problem.blocks;
    let w = blocks.aggregate(&problem.w);
    let s = blocks.aggregate(&problem.s);
    blocks.expand(&pava_box(&w, &s))
}

/// Minimizer of `w·b² − 2·s·b` over `[0, 1]`. A flat block (w = s = 0)
/// takes 1, the most shrinkage; it then pools into any smaller neighbor.
#[inline]
fn block_value(w: f64, s: f64) -> f64 {
    if w > 0.0 {
        (s / w).clamp(0.0, 1.0)
    } else if s < 0.0 {
        0.0
    } else {
        1.0
    }
}

/// PAVA on per-block aggregates, blocks given in constraint order
/// (values must be nondecreasing along the slice). Returns one value per
/// block.
pub fn pava_box(weights: &[f64], linear: &[f64]) -> Vec<f64> {
    debug_assert_eq!(weights.len(), linear.len());
    // (pooled weight, pooled linear term, number of blocks, value)
    let mut stack: Vec<(f64, f64, usize, f64)> = Vec::with_capacity(weights.len());
    for (&w, &s) in weights.iter().zip(linear) {
        stack.push((w, s, 1, block_value(w, s)));
        while stack.len() >= 2 {
            let n = stack.len();
            if stack[n - 2].3 <= stack[n - 1].3 {
                break;
            }
            let (w2, s2, c2, _) = stack.pop().unwrap();
            let top = stack.last_mut().unwrap();
            top.0 += w2;
            top.1 += s2;
            top.2 += c2;
            top.3 = block_value(top.0, top.1);
        }
    }
    let mut out = Vec::with_capacity(weights.len());
    for (_, _, count, value) in stack {
        out.extend(std::iter::repeat(value).take(count));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn solve(w: &[f64], s: &[f64], tau: &[f64]) -> Vec<f64> {
        solve_monotone(&MonotoneProblem::new(w.to_vec(), s.to_vec(), tau).unwrap())
    }

    #[test]
    fn feasible_unconstrained_solution() {
        let b = solve(&[1.0, 1.0], &[0.2, 0.8], &[2.0, 1.0]);
        assert_abs_diff_eq!(b[0], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(b[1], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn two_violators_pool() {
        let b = solve(&[1.0, 1.0], &[0.8, 0.2], &[2.0, 1.0]);
        assert_abs_diff_eq!(b[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn three_way_pool() {
        let b = solve(&[1.0, 1.0, 1.0], &[2.0, -1.0, 0.5], &[3.0, 2.0, 1.0]);
        for v in b {
            assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_weight_block_is_linear() {
        // b1 ≤ b2; objective -b1 + b2² - 0.4 b2 is minimized on b1 = b2 = 0.7
        let b = solve(&[0.0, 1.0], &[0.5, 0.2], &[2.0, 1.0]);
        assert_abs_diff_eq!(b[0], 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(b[1], 0.7, epsilon = 1e-15);
        // all weights zero with positive linear terms: full shrinkage
        assert_eq!(solve(&[0.0, 0.0], &[0.1, 0.3], &[2.0, 1.0]), vec![1.0, 1.0]);
    }

    #[test]
    fn equal_tau_share_value_and_order_follows_tau() {
        let tau = [1.0, 3.0, 1.0, 2.0];
        let b = solve(&[1.0, 1.0, 2.0, 1.0], &[0.9, 0.1, 0.3, 0.4], &tau);
        assert_eq!(b[0].to_bits(), b[2].to_bits());
        assert!(b[1] <= b[3] && b[3] <= b[0]);
    }

    #[test]
    fn dimension_errors() {
        assert!(MonotoneProblem::new(vec![1.0], vec![1.0, 2.0], &[1.0]).is_err());
        assert!(MonotoneProblem::new(vec![1.0], vec![1.0], &[1.0, 2.0]).is_err());
        assert!(MonotoneProblem::new(vec![-1.0], vec![1.0], &[1.0]).is_err());
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        (1usize..=8).prop_flat_map(|p| {
            (
                prop::collection::vec(prop_oneof![Just(0.0), 0.0..3.0f64], p),
                prop::collection::vec(-1.0..2.0f64, p),
                prop::collection::vec(1u8..5, p).prop_map(|v| v.into_iter().map(f64::from).collect()),
            )
        })
    }

    proptest! {
        #[test]
        fn output_is_feasible((w, s, tau) in instance()) {
            let problem = MonotoneProblem::new(w, s, &tau).unwrap();
            let b = solve_monotone(&problem);
            for &v in &b {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            for i in 0..tau.len() {
                for j in 0..tau.len() {
                    if tau[i] >= tau[j] {
                        prop_assert!(b[i] <= b[j]);
                    }
                    if tau[i] == tau[j] {
                        prop_assert_eq!(b[i].to_bits(), b[j].to_bits());
                    }
                }
            }
        }

        #[test]
        fn idempotent_on_fitted_values((w, s, tau) in instance()) {
            let w: Vec<f64> = w.into_iter().map(|v| v + 0.1).collect();
            let b = solve_monotone(&MonotoneProblem::new(w.clone(), s, &tau).unwrap());
            let refit_s: Vec<f64> = w.iter().zip(&b).map(|(w, b)| w * b).collect();
            let again = solve_monotone(&MonotoneProblem::new(w, refit_s, &tau).unwrap());
            for (x, y) in b.iter().zip(&again) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
