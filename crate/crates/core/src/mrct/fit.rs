use std::collections::HashMap;
use std::rc::Rc;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use serde::Serialize;

use super::config::{AlphaSpec, MrctConfig, Selection};
use super::eigen::{EigenSystem, SquaredScores};
use super::Representation;
use crate::error::{MrctError, Result};
use crate::funcdata::SubsetH;
use crate::metrics::excess_kurtosis_sq;
use crate::rng::SeedTree;
use crate::wchisq::{self, draw_chisq_stream, wchisq_median, ChiSqDraws};

/// Outcome of the consistency-factor fixed-point iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct KSolution {
    pub k: f64,
    /// Squared α-Mahalanobis distances `d²(α/k₀)` of the final iteration,
    /// not yet divided by `k`.
    pub distances: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Every `k₁` produced, in order.
    pub history: Vec<f64>,
}

/// Solves `k = med_i d²_i(α/k) / med(Σ λ_j²/(λ_j+α/k)² χ²₁)` by fixed-point
/// iteration from `k = 1`, using the same `draws` for every iterate.
pub fn solve_k<R: Representation + ?Sized>(
    data: &R,
    eig: &EigenSystem,
    alpha: f64,
    draws: &ChiSqDraws,
    cfg: &MrctConfig,
) -> Result<KSolution> {
    let scores = SquaredScores::compute(data, eig);
    solve_k_scores(&scores, eig.eigvals(), alpha, draws, cfg.eps_k, cfg.max_k_iters)
}

pub(crate) fn solve_k_scores(
    scores: &SquaredScores,
    eigvals: &[f64],
    alpha: f64,
    draws: &ChiSqDraws,
    eps_k: f64,
    max_iters: usize,
) -> Result<KSolution> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(MrctError::domain(format!("alpha must be positive, got {alpha}")));
    }
    let mut k1 = 1.0;
    let mut history = Vec::new();
    let mut distances = Vec::new();
    for it in 1..=max_iters {
        let k0 = k1;
        let a = alpha / k0;
        distances = scores.distances(eigvals, a);
        let weights: Vec<f64> = eigvals.iter().map(|l| (l / (l + a)).powi(2)).collect();
        let theory = wchisq_median(&weights, draws)?;
        let mut sorted = distances.clone();
        let sample = wchisq::median_in_place(&mut sorted);
        k1 = sample / theory;
        history.push(k1);
        if !k1.is_finite() || k1 <= 0.0 {
            return Err(MrctError::Convergence {
                message: format!("consistency factor left (0, ∞) at iteration {it}"),
                history,
            });
        }
        if (k1 - k0).powi(2) < eps_k {
            return Ok(KSolution { k: k1, distances, iterations: it, converged: true, history });
        }
    }
    Ok(KSolution {
        k: k1,
        distances,
        iterations: max_iters,
        converged: false,
        history,
    })
}

/// Indices of the `h` smallest values, ties to the lower index, sorted.
pub(crate) fn smallest_h(values: &[f64], h: usize) -> SubsetH {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order.truncate(h);
    order.sort_unstable();
    SubsetH::from_sorted_unchecked(order)
}

/// Everything known about one subset `H₀`: its eigensystem, consistency
/// factor, the reported distances of all curves and its successor `H₁`.
#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    pub eig: EigenSystem,
    pub k_solution: KSolution,
    /// `k⁻¹ d²` for every curve.
    pub reported: Vec<f64>,
    pub next: SubsetH,
    pub trace: f64,
    /// Selection objective, smaller is better.
    pub score: f64,
}

/// One concentration step from `h0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CStep {
    pub subset: SubsetH,
    pub k: f64,
    pub k_converged: bool,
    /// Robust squared distances `k⁻¹ d²` computed from `h0`.
    pub distances: Vec<f64>,
    /// Mean robust distance over `h0`.
    pub objective: f64,
}

/// A single C-step with explicitly supplied Monte-Carlo draws.
pub fn c_step<R: Representation + ?Sized>(
    data: &R,
    h0: &SubsetH,
    alpha: f64,
    cfg: &MrctConfig,
    draws: &ChiSqDraws,
) -> Result<CStep> {
    let e = evaluate_subset(data, h0, alpha, cfg, draws)?;
    Ok(CStep {
        subset: e.next,
        k: e.k_solution.k,
        k_converged: e.k_solution.converged,
        distances: e.reported,
        objective: e.trace,
    })
}

fn evaluate_subset<R: Representation + ?Sized>(
    data: &R,
    subset: &SubsetH,
    alpha: f64,
    cfg: &MrctConfig,
    draws: &ChiSqDraws,
) -> Result<Evaluation> {
    if subset.h() != cfg.h {
        return Err(MrctError::dim(format!(
            "subset has {} members, configuration says h = {}",
            subset.h(),
            cfg.h
        )));
    }
    let eig = data.eigensystem(subset, cfg.rank_tol)?;
    let scores = SquaredScores::compute(data, &eig);
    let ks = solve_k_scores(&scores, eig.eigvals(), alpha, draws, cfg.eps_k, cfg.max_k_iters)?;
    let next = smallest_h(&ks.distances, cfg.h);
    let reported: Vec<f64> = ks.distances.iter().map(|d| d / ks.k).collect();
    let inside: Vec<f64> = subset.indices().iter().map(|&i| reported[i]).collect();
    let trace = inside.iter().sum::<f64>() / cfg.h as f64;
    let score = match cfg.selection {
        Selection::Trace => trace,
        Selection::TraceQ(q) => {
            let mut sorted = inside;
            sorted.sort_by(f64::total_cmp);
            let m = ((q * cfg.h as f64).ceil() as usize).clamp(1, cfg.h);
            sorted[..m].iter().sum::<f64>() / m as f64
        }
        // Maximized, so negate; a zero-variance distance vector ranks last.
        Selection::Kurtosis => excess_kurtosis_sq(&reported).map(|v| -v).unwrap_or(f64::INFINITY),
    };
    Ok(Evaluation {
        eig: eig.with_k(ks.k),
        k_solution: ks,
        reported,
        next,
        trace,
        score,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainStart {
    /// The `h` curves closest to the pointwise median curve.
    Median,
    Random(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainOutcome {
    FixedPoint,
    /// Revisited an earlier subset other than the current one.
    Cycle,
    /// Hit `max_outer_iters` without revisiting.
    MaxIterations,
    /// The start or a later subset had no usable covariance.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSummary {
    pub start: ChainStart,
    pub outcome: ChainOutcome,
    pub iterations: usize,
    /// Subset the chain settled on; `None` for failed chains.
    pub subset: Option<SubsetH>,
    pub score: Option<f64>,
}

/// Fitted estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct MrctResult {
    pub subset: SubsetH,
    pub alpha: f64,
    pub k: f64,
    /// Robust squared α-Mahalanobis distances `k⁻¹ d²` of all curves.
    pub distances: Vec<f64>,
    pub cutoff: f64,
    pub flags: Vec<bool>,
    /// Mean robust distance over the optimal subset.
    pub trace_objective: f64,
    /// Value of the configured selection criterion (negated for kurtosis).
    pub selection_objective: f64,
    /// C-steps taken by the chain that produced the optimum.
    pub n_outer_iters: usize,
    /// Chains that ended at a fixed point.
    pub n_starts_converged: usize,
    /// The optimum is a fixed point and its `k` iteration converged.
    pub converged: bool,
    pub k_converged: bool,
    /// Operator-scale eigenvalues `λ̂` of the optimal subset, descending.
    pub eigvals: Vec<f64>,
    pub mean: DVector<f64>,
    pub chains: Vec<ChainSummary>,
}

impl MrctResult {
    pub fn h(&self) -> usize {
        self.subset.h()
    }

    /// `k·λ̂`, the eigenvalues of the robust covariance estimate.
    pub fn robust_eigvals(&self) -> Vec<f64> {
        self.eigvals.iter().map(|l| self.k * l).collect()
    }

    pub fn n_flagged(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }
}

/// Multi-start search with memoized subset evaluations.
pub struct MrctEngine<'a, R: Representation + ?Sized> {
    data: &'a R,
    cfg: MrctConfig,
    alpha: f64,
    draws: ChiSqDraws,
    tree: SeedTree,
    cache: HashMap<SubsetH, Rc<Evaluation>>,
}

impl<'a, R: Representation + ?Sized> MrctEngine<'a, R> {
    /// Engine at a fixed `alpha`; `cfg.alpha` is ignored.
    pub fn new(data: &'a R, cfg: &MrctConfig, alpha: f64) -> Result<Self> {
        let cfg = MrctConfig { alpha: AlphaSpec::Fixed(alpha), ..cfg.clone() };
        cfg.validate(data.n())?;
        let tree = SeedTree::new(cfg.seed);
        let cols = (cfg.h - 1).min(data.dim()).max(1);
        let draws = draw_chisq_stream(cfg.mc_n, cols, &tree, "kmedian")?;
        Ok(Self { data, cfg, alpha, draws, tree, cache: HashMap::new() })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn draws(&self) -> &ChiSqDraws {
        &self.draws
    }

    pub fn config(&self) -> &MrctConfig {
        &self.cfg
    }

    pub(crate) fn evaluate(&mut self, subset: &SubsetH) -> Result<Rc<Evaluation>> {
        if let Some(e) = self.cache.get(subset) {
            return Ok(Rc::clone(e));
        }
        let e = Rc::new(evaluate_subset(self.data, subset, self.alpha, &self.cfg, &self.draws)?);
        self.cache.insert(subset.clone(), Rc::clone(&e));
        Ok(e)
    }

    /// The C-step map `f(H)`.
    pub fn step(&mut self, subset: &SubsetH) -> Result<SubsetH> {
        Ok(self.evaluate(subset)?.next.clone())
    }

    /// Selection objective of `subset` (smaller is better).
    pub fn objective(&mut self, subset: &SubsetH) -> Result<f64> {
        Ok(self.evaluate(subset)?.score)
    }

    /// Starting subsets: the median start, then `n_starts` random ones.
    pub fn starts(&self) -> Vec<(ChainStart, SubsetH)> {
        let n = self.data.n();
        let mut out = vec![(ChainStart::Median, median_start(self.data.coordinates(), self.cfg.h))];
        for c in 0..self.cfg.n_starts {
            let mut rng = self.tree.stream(&format!("starts:chain_{c}"));
            let mut idx = index::sample(&mut rng, n, self.cfg.h).into_vec();
            idx.sort_unstable();
            out.push((ChainStart::Random(c), SubsetH::from_sorted_unchecked(idx)));
        }
        out
    }

    /// Iterates C-steps from `start` until a subset repeats or the iteration
    /// limit is hit. Cycles resolve to their best member.
    pub fn run_chain(&mut self, kind: ChainStart, start: SubsetH) -> Result<ChainSummary> {
        let mut visited: Vec<SubsetH> = vec![start];
        let mut seen: HashMap<SubsetH, usize> = HashMap::new();
        seen.insert(visited[0].clone(), 0);
        let failed = |iterations| ChainSummary {
            start: kind,
            outcome: ChainOutcome::Failed,
            iterations,
            subset: None,
            score: None,
        };
        for it in 0..self.cfg.max_outer_iters {
            let current = visited.last().unwrap().clone();
            let e = match self.evaluate(&current) {
                Ok(e) => e,
                Err(err) if chain_local(&err) => return Ok(failed(it)),
                Err(err) => return Err(err),
            };
            let next = e.next.clone();
            if next == current {
                return Ok(ChainSummary {
                    start: kind,
                    outcome: ChainOutcome::FixedPoint,
                    iterations: it + 1,
                    subset: Some(current),
                    score: Some(e.score),
                });
            }
            if let Some(&first) = seen.get(&next) {
                let mut best: Option<(f64, SubsetH)> = None;
                for s in &visited[first..] {
                    let sc = self.evaluate(s)?.score;
                    if best.as_ref().is_none_or(|(b, bs)| better(sc, s, *b, bs)) {
                        best = Some((sc, s.clone()));
                    }
                }
                let (score, subset) = best.unwrap();
                return Ok(ChainSummary {
                    start: kind,
                    outcome: ChainOutcome::Cycle,
                    iterations: it + 1,
                    subset: Some(subset),
                    score: Some(score),
                });
            }
            seen.insert(next.clone(), visited.len());
            visited.push(next);
        }
        let last = visited.pop().unwrap();
        match self.evaluate(&last) {
            Ok(e) => Ok(ChainSummary {
                start: kind,
                outcome: ChainOutcome::MaxIterations,
                iterations: self.cfg.max_outer_iters,
                subset: Some(last),
                score: Some(e.score),
            }),
            Err(err) if chain_local(&err) => Ok(failed(self.cfg.max_outer_iters)),
            Err(err) => Err(err),
        }
    }

    /// Runs every chain and assembles the result at the selected subset.
    pub fn fit(&mut self) -> Result<MrctResult> {
        let mut chains = Vec::new();
        for (kind, start) in self.starts() {
            chains.push(self.run_chain(kind, start)?);
        }
        let fixed: Vec<&ChainSummary> =
            chains.iter().filter(|c| c.outcome == ChainOutcome::FixedPoint).collect();
        let pool: Vec<&ChainSummary> = if fixed.is_empty() {
            chains.iter().filter(|c| c.subset.is_some()).collect()
        } else {
            fixed
        };
        let best = pool
            .iter()
            .copied()
            .reduce(|a, b| {
                let (sa, sb) = (a.score.unwrap(), b.score.unwrap());
                let (ha, hb) = (a.subset.as_ref().unwrap(), b.subset.as_ref().unwrap());
                if better(sb, hb, sa, ha) { b } else { a }
            })
            .ok_or_else(|| MrctError::Estimation("every chain hit a degenerate subset".into()))?;
        let subset = best.subset.clone().unwrap();
        let n_outer_iters = best.iterations;
        let is_fixed = best.outcome == ChainOutcome::FixedPoint;
        let n_starts_converged =
            chains.iter().filter(|c| c.outcome == ChainOutcome::FixedPoint).count();

        let e = self.evaluate(&subset)?;
        let cut = cutoff(&e.eig, self.alpha, self.cfg.cutoff_q, self.cfg.mc_n_cutoff, &self.tree)?;
        Ok(MrctResult {
            subset,
            alpha: self.alpha,
            k: e.k_solution.k,
            distances: e.reported.clone(),
            cutoff: cut,
            flags: flag_outliers(&e.reported, cut),
            trace_objective: e.trace,
            selection_objective: e.score,
            n_outer_iters,
            n_starts_converged,
            converged: is_fixed && e.k_solution.converged,
            k_converged: e.k_solution.converged,
            eigvals: e.eig.eigvals().to_vec(),
            mean: e.eig.mean().clone(),
            chains,
        })
    }
}

fn chain_local(err: &MrctError) -> bool {
    matches!(err, MrctError::DegenerateSubset(_) | MrctError::Convergence { .. })
}

/// Strict preference: lower score, then lexicographically smaller subset.
fn better(score: f64, subset: &SubsetH, best: f64, best_subset: &SubsetH) -> bool {
    score.total_cmp(&best).then_with(|| subset.cmp(best_subset)).is_lt()
}

/// The `h` rows closest (Euclidean) to the coordinatewise median row.
pub(crate) fn median_start(x: &DMatrix<f64>, h: usize) -> SubsetH {
    let (n, q) = x.shape();
    let median: Vec<f64> = (0..q)
        .map(|j| {
            let mut col: Vec<f64> = x.column(j).iter().copied().collect();
            wchisq::median_in_place(&mut col)
        })
        .collect();
    let dist: Vec<f64> = (0..n)
        .map(|i| (0..q).map(|j| (x[(i, j)] - median[j]).powi(2)).sum())
        .collect();
    smallest_h(&dist, h)
}

/// Fits the estimator. With `AlphaSpec::Auto` the regularization parameter
/// is chosen first with the default selection settings.
pub fn mrct_fit<R: Representation + ?Sized>(data: &R, cfg: &MrctConfig) -> Result<MrctResult> {
    cfg.validate(data.n())?;
    let alpha = match cfg.alpha {
        AlphaSpec::Fixed(a) => a,
        AlphaSpec::Auto => {
            let grid = crate::alpha_select::default_alpha_grid();
            let a0 = crate::alpha_select::default_alpha0(data.n(), data.dim());
            let trace = crate::alpha_select::select_alpha(data, &grid, a0, cfg)?;
            match trace.final_fit {
                Some(fit) => return Ok(fit),
                None => trace.chosen_alpha,
            }
        }
    };
    MrctEngine::new(data, cfg, alpha)?.fit()
}

/// Empirical `q`-quantile of `Σ (kλ_j)²/(kλ_j+α)² χ²₁` from the `"cutoff"`
/// substream of `tree`.
pub fn cutoff(eig: &EigenSystem, alpha: f64, q: f64, n_draws: usize, tree: &SeedTree) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(MrctError::domain(format!("alpha must be positive, got {alpha}")));
    }
    let weights: Vec<f64> = eig
        .robust_eigvals()
        .iter()
        .map(|x| (x / (x + alpha)).powi(2))
        .collect();
    let draws = draw_chisq_stream(n_draws, weights.len().max(1), tree, "cutoff")?;
    wchisq::wchisq_quantile(&weights, q, &draws)
}

pub fn flag_outliers(distances: &[f64], cutoff: f64) -> Vec<bool> {
    distances.iter().map(|d| *d > cutoff).collect()
}

/// Robust covariance `k·Ĉ_{H_opt}` in the representation's native units.
pub fn robust_covariance<R: Representation + ?Sized>(
    data: &R,
    result: &MrctResult,
) -> Result<DMatrix<f64>> {
    Ok(data.subset_covariance(&result.subset)? * result.k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcdata::{FunctionalSample, Grid};
    use crate::simulate::{model_dataset, Model, ModelSpec};
    use crate::wchisq::draw_chisq;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn gaussian(n: usize, p: usize, seed: u64) -> FunctionalSample {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v = DMatrix::from_fn(n, p, |_, _| {
            let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
            z
        });
        FunctionalSample::new(Grid::equidistant(p, 0.0, 1.0).unwrap(), v, None).unwrap()
    }

    #[test]
    fn smallest_h_breaks_ties_by_index() {
        assert_eq!(smallest_h(&[1.0, 1.0, 1.0, 1.0], 2).indices(), &[0, 1]);
        assert_eq!(smallest_h(&[3.0, 0.5, 2.0, 0.5], 3).indices(), &[1, 2, 3]);
    }

    #[test]
    fn equal_distances_select_lowest_indices() {
        // Two curves repeated: every distance is identical.
        let mut v = DMatrix::zeros(6, 3);
        for i in 0..6 {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            v.row_mut(i).copy_from_slice(&[s, 0.5 * s, -s]);
        }
        let s = FunctionalSample::new(Grid::equidistant(3, 0.0, 1.0).unwrap(), v, None).unwrap();
        let cfg = MrctConfig::new(6).with_h(4).with_alpha(0.5);
        let draws = draw_chisq(200, 3, 1).unwrap();
        let h0 = SubsetH::new(vec![2, 3, 4, 5], 6).unwrap();
        let step = c_step(&s, &h0, 0.5, &cfg, &draws).unwrap();
        assert_eq!(step.subset.indices(), &[0, 1, 2, 3]);
    }

    #[test]
    fn k_fixed_point_is_reached_immediately() {
        let s = gaussian(30, 5, 4);
        let eig = s_eig(&s, 30);
        let draws = draw_chisq(2000, 5, 8).unwrap();
        let cfg = MrctConfig::new(30).with_h(30);
        let scores = SquaredScores::compute(&s, &eig);
        // ratio(α) = med d²(α) / med Σ λ²/(λ+α)² χ² ; find α with ratio 1.
        let ratio = |a: f64| {
            let d = scores.distances(eig.eigvals(), a);
            let w: Vec<f64> = eig.eigvals().iter().map(|l| (l / (l + a)).powi(2)).collect();
            let mut d2 = d.clone();
            wchisq::median_in_place(&mut d2) / wchisq_median(&w, &draws).unwrap()
        };
        let (mut lo, mut hi) = (1e-6, 1e3);
        let (rlo, rhi) = (ratio(lo) - 1.0, ratio(hi) - 1.0);
        assert!(rlo * rhi < 0.0, "no sign change: {rlo} {rhi}");
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if (ratio(mid) - 1.0).signum() == rlo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let alpha = 0.5 * (lo + hi);
        let sol = solve_k(&s, &eig, alpha, &draws, &cfg).unwrap();
        assert_eq!(sol.iterations, 1);
        assert!(sol.converged);
        assert!((sol.k - 1.0).abs() < 1e-3, "{}", sol.k);
    }

    fn s_eig(s: &FunctionalSample, h: usize) -> EigenSystem {
        let sub = SubsetH::new((0..h).collect(), s.n()).unwrap();
        s.eigensystem(&sub, 1e-12).unwrap()
    }

    #[test]
    fn solve_k_is_scale_equivariant() {
        let s = gaussian(25, 6, 2);
        let c = 4.0;
        let sc = s.scaled(f64::sqrt(c)).unwrap();
        let draws = draw_chisq(500, 6, 3).unwrap();
        let cfg = MrctConfig::new(25);
        let a = solve_k(&s, &s_eig(&s, 20), 0.3, &draws, &cfg).unwrap();
        let b = solve_k(&sc, &s_eig(&sc, 20), 0.3 * c, &draws, &cfg).unwrap();
        assert_relative_eq!(a.k, b.k, max_relative = 1e-10);
        for (x, y) in a.distances.iter().zip(&b.distances) {
            assert_relative_eq!(x, y, max_relative = 1e-10);
        }
    }

    #[test]
    fn gaussian_data_gives_k_near_one() {
        let s = gaussian(2000, 4, 12);
        let draws = draw_chisq(4000, 4, 5).unwrap();
        let cfg = MrctConfig::new(2000).with_h(2000);
        let sol = solve_k(&s, &s_eig(&s, 2000), 0.05, &draws, &cfg).unwrap();
        assert!(sol.converged);
        assert!((sol.k - 1.0).abs() < 0.15, "{}", sol.k);
    }

    #[test]
    fn gross_outlier_is_expelled() {
        let mut s = gaussian(20, 5, 31).values().clone();
        s.row_mut(0).add_scalar_mut(50.0);
        let s = FunctionalSample::new(Grid::equidistant(5, 0.0, 1.0).unwrap(), s, None).unwrap();
        let cfg = MrctConfig::new(20).with_h(15);
        let draws = draw_chisq(2000, 5, 1).unwrap();
        let h0 = SubsetH::new((0..15).collect(), 20).unwrap();
        let step = c_step(&s, &h0, 1.0, &cfg, &draws).unwrap();
        assert!(!step.subset.contains(0));
        let max = step.distances.iter().copied().fold(0.0, f64::max);
        assert_eq!(step.distances[0], max);
    }

    #[test]
    fn fit_returns_fixed_point() {
        let s = gaussian(12, 4, 77);
        let cfg = MrctConfig::new(12).with_h(7).with_alpha(0.4).with_seed(3);
        let res = mrct_fit(&s, &cfg).unwrap();
        let mut engine = MrctEngine::new(&s, &cfg, 0.4).unwrap();
        assert_eq!(engine.step(&res.subset).unwrap(), res.subset);
        assert!(res.converged);
        assert_eq!(res.flags, flag_outliers(&res.distances, res.cutoff));
        let trace: f64 =
            res.subset.indices().iter().map(|&i| res.distances[i]).sum::<f64>() / 7.0;
        assert_relative_eq!(trace, res.trace_objective, max_relative = 1e-14);
    }

    #[test]
    fn fit_is_scale_equivariant() {
        let s = model_dataset(&ModelSpec::new(Model::Two, 40, 20, 0.1, 4)).unwrap();
        let cfg = MrctConfig::new(40).with_alpha(0.2).with_seed(9);
        let a = mrct_fit(&s, &cfg).unwrap();
        for c in [0.25, 4.0, 100.0] {
            let b = mrct_fit(&s.scaled(f64::sqrt(c)).unwrap(), &cfg.clone().with_alpha(0.2 * c)).unwrap();
            assert_eq!(a.subset, b.subset);
            assert_relative_eq!(a.k, b.k, max_relative = 1e-10);
            for (x, y) in a.distances.iter().zip(&b.distances) {
                assert_relative_eq!(x, y, max_relative = 1e-10, epsilon = 1e-300);
            }
        }
    }

    #[test]
    fn median_start_fit_is_permutation_equivariant() {
        let s = model_dataset(&ModelSpec::new(Model::One, 30, 15, 0.1, 2)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut perm: Vec<usize> = (0..30).collect();
        for i in (1..30).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let sp = s.permuted(&perm).unwrap();
        let cfg = MrctConfig::new(30).with_alpha(0.5).with_starts(0);
        let a = mrct_fit(&s, &cfg).unwrap();
        let b = mrct_fit(&sp, &cfg).unwrap();
        // Row i of the permuted sample is row perm[i] of the original.
        for (i, &j) in perm.iter().enumerate() {
            assert_relative_eq!(b.distances[i], a.distances[j], max_relative = 1e-9);
            assert_eq!(b.subset.contains(i), a.subset.contains(j));
        }
    }

    #[test]
    fn cutoff_single_weight() {
        let v = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 0.0]);
        let s = FunctionalSample::new(Grid::new(vec![0.0, 2.0]).unwrap(), v, None).unwrap();
        let eig = s.eigensystem(&SubsetH::new(vec![0, 1], 3).unwrap(), 1e-12).unwrap();
        let tree = SeedTree::new(1);
        let c50 = cutoff(&eig, 1.0, 0.5, 20000, &tree).unwrap();
        assert!((c50 - 0.25 * 0.454936).abs() < 0.01, "{c50}");
        let c95 = cutoff(&eig, 1.0, 0.95, 20000, &tree).unwrap();
        assert!(cutoff(&eig, 1.0, 0.99, 20000, &tree).unwrap() > c95);
        assert!(cutoff(&eig, 1e12, 0.99, 2000, &tree).unwrap() < 1e-20);
    }

    #[test]
    fn strict_flagging() {
        assert_eq!(flag_outliers(&[0.1, 5.0, 1.0], 1.0), vec![false, true, false]);
    }
}
