//! Monte-Carlo medians and quantiles of `Σ_j w_j Y_j` with `Y_j ~ χ²(1)` i.i.d.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{MrctError, Result};
use crate::rng::SeedTree;

/// Frozen `N × r` matrix of independent χ²(1) draws (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct ChiSqDraws {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    seed: u64,
    label: String,
}

impl ChiSqDraws {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    /// Seed and substream label the draws came from.
    pub fn provenance(&self) -> (u64, &str) {
        (self.seed, &self.label)
    }
}

pub fn draw_chisq(rows: usize, cols: usize, seed: u64) -> Result<ChiSqDraws> {
    draw_chisq_stream(rows, cols, &SeedTree::new(seed), "chisq")
}

/// Draws from a named substream of `tree`.
pub fn draw_chisq_stream(
    rows: usize,
    cols: usize,
    tree: &SeedTree,
    label: &str,
) -> Result<ChiSqDraws> {
    if rows == 0 || cols == 0 {
        return Err(MrctError::domain(format!(
            "chi-square draws need N ≥ 1 and r ≥ 1, got {rows} × {cols}"
        )));
    }
    let mut rng = tree.stream(label);
    let data = (0..rows * cols)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * z
        })
        .collect();
    Ok(ChiSqDraws {
        rows,
        cols,
        data,
        seed: tree.seed(),
        label: label.to_string(),
    })
}

fn weighted_row_sums(weights: &[f64], draws: &ChiSqDraws) -> Result<Vec<f64>> {
    if weights.len() > draws.cols() {
        return Err(MrctError::dim(format!(
            "{} weights but only {} chi-square columns",
            weights.len(),
            draws.cols()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(MrctError::domain(format!(
            "weights must be finite and non-negative, got {w}"
        )));
    }
    let r = weights.len();
    Ok((0..draws.rows())
        .map(|i| {
            draws.row(i)[..r]
                .iter()
                .zip(weights)
                .map(|(y, w)| w * y)
                .sum()
        })
        .collect())
}

/// Median of the weighted row sums; midpoint of the central pair for even `N`.
pub fn wchisq_median(weights: &[f64], draws: &ChiSqDraws) -> Result<f64> {
    let mut sums = weighted_row_sums(weights, draws)?;
    Ok(median_in_place(&mut sums))
}

/// Empirical `q`-quantile: the `⌈qN⌉`-th smallest weighted row sum (1-based).
pub fn wchisq_quantile(weights: &[f64], q: f64, draws: &ChiSqDraws) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(MrctError::domain(format!("quantile level {q} not in (0, 1)")));
    }
    let mut sums = weighted_row_sums(weights, draws)?;
    let n = sums.len();
    let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
    let (_, v, _) = sums.select_nth_unstable_by(rank - 1, f64::total_cmp);
    Ok(*v)
}

/// Median with the midpoint convention for even lengths. Reorders `values`.
pub(crate) fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    debug_assert!(n > 0);
    let mid = n / 2;
    let (lower, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let below = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (below + upper)
    }
}
