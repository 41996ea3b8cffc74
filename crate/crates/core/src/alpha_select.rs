//! Data-driven choice of the regularization parameter and the subset-size
//! scan diagnostic.
//!
//! For a fitted robust spectrum `kλ̂`, each candidate `α` maps it to
//! standardized eigenvalues `x²/(x+α)²` in `[0, 1)`. These are split into a
//! signal cluster (free center) and a noise cluster (center 0); `g(α)` is the
//! joint within-cluster sum of squares relative to the squared signal
//! center. Selection alternates between fitting at the current `α` and moving
//! to the grid minimizer of `g` until the choice repeats.

use nalgebra::DMatrix;

use crate::error::{MrctError, Result};
use crate::mrct::{robust_covariance, MrctConfig, MrctEngine, MrctResult, Representation};

/// `x ↦ x²/(x+α)²` applied to robust eigenvalues.
pub fn standardized_eigvals(robust_eigvals: &[f64], alpha: f64) -> Vec<f64> {
    robust_eigvals
        .iter()
        .map(|&x| if x > 0.0 { (x / (x + alpha)).powi(2) } else { 0.0 })
        .collect()
}

/// Best two-cluster split of a descending sequence.
///
/// Returns the signal-cluster size `m` minimizing `V₁ + V₂` (ties to the
/// smallest `m`) and `g = (V₁ + V₂)/c²` with `c` the signal-cluster mean.
pub fn partition_objective(lst: &[f64]) -> Result<(usize, f64)> {
    if lst.is_empty() {
        return Err(MrctError::domain("empty eigenvalue sequence"));
    }
    let total_sq: f64 = lst.iter().map(|v| v * v).sum();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, &v) in lst.iter().enumerate() {
        let m = i + 1;
        sum += v;
        sum_sq += v * v;
        let c = sum / m as f64;
        // Σ(v - c)² over the head plus Σ v² over the tail.
        let v1 = (sum_sq - m as f64 * c * c).max(0.0);
        let v2 = (total_sq - sum_sq).max(0.0);
        let within = v1 + v2;
        if best.is_none_or(|(_, w, _)| within < w) {
            best = Some((m, within, c));
        }
    }
    let (m, within, c) = best.unwrap();
    if !(c > 0.0) {
        return Err(MrctError::numerical("signal cluster center is zero; g is undefined"));
    }
    Ok((m, within / (c * c)))
}

/// Record of one selection run.
#[derive(Debug, Clone)]
pub struct AlphaSelectionTrace {
    pub grid: Vec<f64>,
    /// `g` over the grid for the spectrum that produced the final choice.
    pub g_values: Vec<f64>,
    pub m_alpha: Vec<usize>,
    pub chosen_alpha: f64,
    /// Grid index chosen in each outer iteration.
    pub history: Vec<usize>,
    /// The last choice reproduced itself.
    pub converged: bool,
    /// Fit at `chosen_alpha`, when one was run during selection.
    pub final_fit: Option<MrctResult>,
}

impl AlphaSelectionTrace {
    pub fn chosen_index(&self) -> usize {
        self.grid.iter().position(|a| *a == self.chosen_alpha).unwrap_or(0)
    }
}

/// 30 log-spaced values from `1e-3` to `1e2`.
pub fn default_alpha_grid() -> Vec<f64> {
    log_grid(1e-3, 1e2, 30)
}

pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Starting value: `0.01` when there are fewer coordinates than curves, else 1.
pub fn default_alpha0(n: usize, dim: usize) -> f64 {
    if dim < n {
        0.01
    } else {
        1.0
    }
}

pub const MAX_SELECTION_ITERS: usize = 20;

/// `g` and `m_α` over `grid` for one robust spectrum.
pub fn g_curve(robust_eigvals: &[f64], grid: &[f64]) -> Result<(Vec<f64>, Vec<usize>)> {
    let mut g = Vec::with_capacity(grid.len());
    let mut m = Vec::with_capacity(grid.len());
    for &a in grid {
        let (mi, gi) = partition_objective(&standardized_eigvals(robust_eigvals, a))?;
        g.push(gi);
        m.push(mi);
    }
    Ok((g, m))
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if v.total_cmp(&values[best]).is_lt() {
            best = i;
        }
    }
    best
}

/// Alternates fits and grid minimization of `g`, starting from `alpha0`.
/// Each fit is cold-started with the settings in `cfg`.
pub fn select_alpha<R: Representation + ?Sized>(
    data: &R,
    grid: &[f64],
    alpha0: f64,
    cfg: &MrctConfig,
) -> Result<AlphaSelectionTrace> {
    if grid.is_empty() || grid.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(MrctError::domain("alpha grid must be nonempty and positive"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MrctError::domain("alpha grid must be strictly increasing"));
    }
    if !(alpha0 > 0.0) || !alpha0.is_finite() {
        return Err(MrctError::domain(format!("initial alpha must be positive, got {alpha0}")));
    }

    struct Step {
        choice: usize,
        g: Vec<f64>,
        m: Vec<usize>,
    }
    let mut steps: Vec<Step> = Vec::new();
    // Fits by grid index, so a converged run needs no extra fit.
    let mut fits: Vec<Option<MrctResult>> = vec![None; grid.len()];
    let mut current = alpha0;
    let mut converged = false;
    for _ in 0..MAX_SELECTION_ITERS {
        let fit = MrctEngine::new(data, cfg, current)?.fit()?;
        let (g, m) = g_curve(&fit.robust_eigvals(), grid)?;
        let choice = argmin(&g);
        if let Some(pos) = grid.iter().position(|a| *a == current) {
            fits[pos] = Some(fit);
        }
        let repeat = steps.iter().any(|s| s.choice == choice);
        let same = grid[choice] == current;
        steps.push(Step { choice, g, m });
        if same {
            converged = true;
            break;
        }
        if repeat {
            break;
        }
        current = grid[choice];
    }

    let history: Vec<usize> = steps.iter().map(|s| s.choice).collect();
    let pick = if converged {
        steps.len() - 1
    } else {
        // Smallest g among the choices made.
        (0..steps.len())
            .reduce(|a, b| {
                let (ga, gb) = (steps[a].g[steps[a].choice], steps[b].g[steps[b].choice]);
                if gb.total_cmp(&ga).is_lt() { b } else { a }
            })
            .unwrap()
    };
    let step = steps.swap_remove(pick);
    Ok(AlphaSelectionTrace {
        grid: grid.to_vec(),
        chosen_alpha: grid[step.choice],
        final_fit: fits[step.choice].take(),
        g_values: step.g,
        m_alpha: step.m,
        history,
        converged,
    })
}

/// Objective and covariance movement across subset sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct HScanTrace {
    pub h_values: Vec<usize>,
    /// Mean robust distance over the optimal subset for each `h`.
    pub objective: Vec<f64>,
    /// Frobenius norm of the change in `k·Ĉ_H` between consecutive `h`.
    pub cov_shift: Vec<f64>,
    pub k: Vec<f64>,
    pub n_flagged: Vec<usize>,
}

impl HScanTrace {
    /// Index `i` maximizing `objective[i+1] - objective[i]`; the jump lands
    /// at `h_values[i+1]`.
    pub fn largest_jump(&self) -> Option<usize> {
        let d: Vec<f64> = self.objective.windows(2).map(|w| w[1] - w[0]).collect();
        (!d.is_empty()).then(|| {
            let mut best = 0;
            for (i, v) in d.iter().enumerate() {
                if *v > d[best] {
                    best = i;
                }
            }
            best
        })
    }
}

/// Fits at a fixed `alpha` for every `h` in `h_values`.
pub fn h_scan<R: Representation + ?Sized>(
    data: &R,
    alpha: f64,
    h_values: &[usize],
    cfg: &MrctConfig,
) -> Result<HScanTrace> {
    if h_values.is_empty() {
        return Err(MrctError::domain("no subset sizes to scan"));
    }
    if h_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MrctError::domain("subset sizes must be strictly increasing"));
    }
    let mut trace = HScanTrace {
        h_values: h_values.to_vec(),
        objective: Vec::new(),
        cov_shift: Vec::new(),
        k: Vec::new(),
        n_flagged: Vec::new(),
    };
    let mut prev: Option<DMatrix<f64>> = None;
    for &h in h_values {
        let cfg_h = cfg.clone().with_h(h);
        let fit = MrctEngine::new(data, &cfg_h, alpha)?.fit()?;
        let cov = robust_covariance(data, &fit)?;
        if let Some(p) = &prev {
            trace.cov_shift.push((&cov - p).norm());
        }
        trace.objective.push(fit.trace_objective);
        trace.k.push(fit.k);
        trace.n_flagged.push(fit.n_flagged());
        prev = Some(cov);
    }
    Ok(trace)
}
