//! Brute-force reference oracles for the test suites.
//!
//! Everything here is deliberately naive: exhaustive enumeration over
//! monotone grids and dense rectangular grids. Nothing is shared with the
//! library's solvers.

/// Per-τ summary of raw observations, blocks sorted by τ descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub tau: f64,
    pub n: f64,
    pub sum_y: f64,
    pub sum_y2: f64,
    /// Sum of the variance terms `V(y)/(τ+ν₂)`.
    pub sum_s: f64,
}

/// Groups observations by exact τ and orders the groups by τ descending.
pub fn blocks(y: &[f64], tau: &[f64], s: &[f64]) -> Vec<Block> {
    let mut out: Vec<Block> = Vec::new();
    for i in 0..y.len() {
        match out.iter_mut().find(|b| b.tau == tau[i]) {
            Some(b) => {
                b.n += 1.0;
                b.sum_y += y[i];
                b.sum_y2 += y[i] * y[i];
                b.sum_s += s[i];
            }
            None => out.push(Block {
                tau: tau[i],
                n: 1.0,
                sum_y: y[i],
                sum_y2: y[i] * y[i],
                sum_s: s[i],
            }),
        }
    }
    out.sort_by(|a, b| b.tau.partial_cmp(&a.tau).unwrap());
    out
}

/// Grid `{0, step, 2·step, ..., 1}`.
pub fn unit_grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step).round() as usize;
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

/// Visits every nondecreasing tuple of length `k` drawn from `grid`,
/// threading an accumulator through the recursion so that each level adds
/// its own contribution.
fn visit<A: Copy, F: Fn(A, usize, f64) -> A, G: FnMut(A)>(
    grid: &[f64],
    k: usize,
    level: usize,
    from: usize,
    acc: A,
    add: &F,
    leaf: &mut G,
) {
    if level == k {
        leaf(acc);
        return;
    }
    for g in from..grid.len() {
        let next = add(acc, level, grid[g]);
        visit(grid, k, level + 1, g, next, add, leaf);
    }
}

/// Minimum of `Σ_k (W_k b_k² − 2 S_k b_k)` over nondecreasing grid tuples.
pub fn isotonic_grid_min(w: &[f64], s: &[f64], step: f64) -> f64 {
    let grid = unit_grid(step);
    let mut best = f64::INFINITY;
    visit(
        &grid,
        w.len(),
        0,
        0,
        0.0,
        &|acc: f64, k: usize, b: f64| acc + w[k] * b * b - 2.0 * s[k] * b,
        &mut |v: f64| best = best.min(v),
    );
    best
}

/// Per-index version of [`isotonic_grid_min`]: groups by τ itself.
pub fn isotonic_grid_min_raw(w: &[f64], s: &[f64], tau: &[f64], step: f64) -> f64 {
    let mut taus: Vec<f64> = tau.to_vec();
    taus.sort_by(|a, b| b.partial_cmp(a).unwrap());
    taus.dedup();
    let mut wb = vec![0.0; taus.len()];
    let mut sb = vec![0.0; taus.len()];
    for i in 0..w.len() {
        let k = taus.iter().position(|t| *t == tau[i]).unwrap();
        wb[k] += w[i];
        sb[k] += s[i];
    }
    isotonic_grid_min(&wb, &sb, step)
}

/// Minimum of `URE(b, μ)` over monotone grid tuples `b` (step `step`),
/// with μ minimized exactly over `[lo, hi]` for each tuple.
pub fn semi_grid_min(y: &[f64], tau: &[f64], s: &[f64], lo: f64, hi: f64, step: f64) -> f64 {
    let bl = blocks(y, tau, s);
    let p = y.len() as f64;
    let grid = unit_grid(step);
    let mut best = f64::INFINITY;
    // accumulator: (Σ b² n, Σ b² ΣY, Σ b² ΣY², Σ (1−2b) S)
    visit(
        &grid,
        bl.len(),
        0,
        0,
        (0.0, 0.0, 0.0, 0.0),
        &|acc: (f64, f64, f64, f64), k: usize, b: f64| {
            let blk = &bl[k];
            (
                acc.0 + b * b * blk.n,
                acc.1 + b * b * blk.sum_y,
                acc.2 + b * b * blk.sum_y2,
                acc.3 + (1.0 - 2.0 * b) * blk.sum_s,
            )
        },
        &mut |(a, by, by2, rest): (f64, f64, f64, f64)| {
            let mu = if a > 0.0 { (by / a).clamp(lo, hi) } else { lo };
            let value = (by2 - 2.0 * mu * by + mu * mu * a + rest) / p;
            best = best.min(value);
        },
    );
    best
}

/// Minimum of `URE^G(b)` over monotone grid tuples.
pub fn semi_grand_grid_min(y: &[f64], tau: &[f64], s: &[f64], step: f64) -> f64 {
    let p = y.len() as f64;
    let ybar = y.iter().sum::<f64>() / p;
    let w: Vec<f64> = y.iter().map(|v| (v - ybar) * (v - ybar)).collect();
    let s2: Vec<f64> = s.iter().map(|v| (1.0 - 1.0 / p) * v).collect();
    (isotonic_grid_min_raw(&w, &s2, tau, step) + s.iter().sum::<f64>()) / p
}

/// `URE^P(γ, μ)` evaluated term by term; `gamma = ∞` allowed.
pub fn ure_param_direct(y: &[f64], tau: &[f64], s: &[f64], gamma: f64, mu: f64) -> f64 {
    let p = y.len() as f64;
    let mut total = 0.0;
    for i in 0..y.len() {
        let b = if gamma.is_infinite() { 1.0 } else { gamma / (tau[i] + gamma) };
        total += b * b * (y[i] - mu).powi(2) + (1.0 - 2.0 * b) * s[i];
    }
    total / p
}

/// `URE^PG(γ)` evaluated term by term.
pub fn ure_param_grand_direct(y: &[f64], tau: &[f64], s: &[f64], gamma: f64) -> f64 {
    let p = y.len() as f64;
    let ybar = y.iter().sum::<f64>() / p;
    let mut total = 0.0;
    for i in 0..y.len() {
        let b = if gamma.is_infinite() { 1.0 } else { gamma / (tau[i] + gamma) };
        total += b * b * (y[i] - ybar).powi(2) + (1.0 - 2.0 * (1.0 - 1.0 / p) * b) * s[i];
    }
    total / p
}

fn gamma_of_t(t: f64) -> f64 {
    if t >= 1.0 {
        f64::INFINITY
    } else {
        t / (1.0 - t)
    }
}

/// Minimum of `URE^P` over the rectangular grid `t ∈ {0, t_step, ..., 1}`
/// (γ = t/(1−t)) × `μ ∈ {lo, lo + mu_step·(hi−lo), ..., hi}`.
pub fn param_grid_min(y: &[f64], tau: &[f64], s: &[f64], lo: f64, hi: f64, t_step: f64, mu_step: f64) -> f64 {
    let nt = (1.0 / t_step).round() as usize;
    let nm = (1.0 / mu_step).round() as usize;
    let mut best = f64::INFINITY;
    for a in 0..=nt {
        let gamma = gamma_of_t(a as f64 / nt as f64);
        // expand URE^P as a quadratic in μ for this γ, then scan the μ grid
        let (mut qa, mut qb, mut qc) = (0.0, 0.0, 0.0);
        for i in 0..y.len() {
            let b = if gamma.is_infinite() { 1.0 } else { gamma / (tau[i] + gamma) };
            qa += b * b;
            qb += b * b * y[i];
            qc += b * b * y[i] * y[i] + (1.0 - 2.0 * b) * s[i];
        }
        for m in 0..=nm {
            let mu = if nm == 0 { lo } else { lo + (hi - lo) * m as f64 / nm as f64 };
            let v = (qa * mu * mu - 2.0 * qb * mu + qc) / y.len() as f64;
            best = best.min(v);
        }
    }
    best
}

/// Minimum of `URE^PG` over `t ∈ {0, t_step, ..., 1}`.
pub fn param_grand_grid_min(y: &[f64], tau: &[f64], s: &[f64], t_step: f64) -> f64 {
    let nt = (1.0 / t_step).round() as usize;
    (0..=nt)
        .map(|a| ure_param_grand_direct(y, tau, s, gamma_of_t(a as f64 / nt as f64)))
        .fold(f64::INFINITY, f64::min)
}

/// Exact finite-p risk of the rule `τ/(τ+γ)·Y + γ/(τ+γ)·μ` given the true
/// means and their sampling variances `var_i = V(θ_i)/τ_i`.
pub fn parametric_risk(theta: &[f64], tau: &[f64], var: &[f64], gamma: f64, mu: f64) -> f64 {
    let p = theta.len() as f64;
    let mut total = 0.0;
    for i in 0..theta.len() {
        let b = if gamma.is_infinite() { 1.0 } else { gamma / (tau[i] + gamma) };
        total += (1.0 - b) * (1.0 - b) * var[i] + b * b * (mu - theta[i]).powi(2);
    }
    total / p
}

/// Sample mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Median of a slice (average of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_enumeration_counts() {
        let grid = unit_grid(0.5);
        let mut count = 0;
        visit(&grid, 3, 0, 0, (), &|_, _, _| (), &mut |_| count += 1);
        // multisets of size 3 from 3 values
        assert_eq!(count, 10);
    }

    #[test]
    fn isotonic_grid_examples() {
        // pooled optimum b = (0.5, 0.5)
        let v = isotonic_grid_min(&[1.0, 1.0], &[0.8, 0.2], 1e-4);
        assert!((v - (2.0 * 0.25 - 2.0 * 0.5)).abs() < 1e-12);
    }
}
