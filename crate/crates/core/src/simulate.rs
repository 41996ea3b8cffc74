//! Gaussian-process noise and the three contamination models used for
//! benchmarking the estimator.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{MrctError, Result};
use crate::funcdata::{FunctionalSample, Grid};
use crate::rng::{SeedTree, StreamRng};

/// Ornstein–Uhlenbeck kernel `γ(s,t) = σ² exp(-|s-t| / ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub scale: f64,
    pub range: f64,
}

impl KernelSpec {
    pub fn ou(scale: f64, range: f64) -> Result<Self> {
        if !(scale > 0.0 && range > 0.0) || !scale.is_finite() || !range.is_finite() {
            return Err(MrctError::domain(format!(
                "OU kernel needs positive scale and range, got ({scale}, {range})"
            )));
        }
        Ok(Self { scale, range })
    }
}

pub fn kernel_eval(spec: &KernelSpec, s: f64, t: f64) -> f64 {
    spec.scale * (-(s - t).abs() / spec.range).exp()
}

/// `p × p` matrix of `γ(t_a, t_b)` over the grid.
pub fn kernel_matrix(spec: &KernelSpec, grid: &Grid) -> DMatrix<f64> {
    let t = grid.points();
    DMatrix::from_fn(t.len(), t.len(), |a, b| kernel_eval(spec, t[a], t[b]))
}

/// Symmetric square-root factor `L` with `L Lᵀ = K`; negative eigenvalues
/// from rounding are clipped at zero.
fn kernel_factor(k: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = k.nrows();
    let eig = SymmetricEigen::try_new(k, f64::EPSILON, 0)
        .ok_or_else(|| MrctError::numerical("kernel eigendecomposition did not converge"))?;
    let max = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    for (j, &mu) in eig.eigenvalues.iter().enumerate() {
        if !mu.is_finite() || mu < -1e-8 * max.max(1.0) {
            return Err(MrctError::numerical(format!(
                "kernel matrix is not positive semi-definite (eigenvalue {j} = {mu})"
            )));
        }
    }
    let mut factor = eig.eigenvectors;
    for j in 0..p {
        let s = eig.eigenvalues[j].max(0.0).sqrt();
        factor.column_mut(j).scale_mut(s);
    }
    Ok(factor)
}

/// Draws an `n × p` matrix of zero-mean GP paths using `rng`.
pub(crate) fn gp_paths(
    spec: &KernelSpec,
    grid: &Grid,
    n: usize,
    rng: &mut StreamRng,
) -> Result<DMatrix<f64>> {
    let p = grid.len();
    let factor = kernel_factor(kernel_matrix(spec, grid))?;
    let z = DMatrix::from_fn(p, n, |_, _| StandardNormal.sample(rng));
    Ok((factor * z).transpose())
}

/// `n` independent zero-mean GP curves on `grid`; deterministic given `seed`.
pub fn gp_sample(spec: &KernelSpec, grid: &Grid, n: usize, seed: u64) -> Result<FunctionalSample> {
    let mut rng = SeedTree::new(seed).stream("gp");
    let paths = gp_paths(spec, grid, n, &mut rng)?;
    FunctionalSample::build(grid.clone(), paths, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    /// `30t(1-t)^{1.5}` vs `30t^{1.5}(1-t)`, OU(0.3, 0.3) noise.
    One,
    /// `4t` vs `4t ± 1.8 + bump at μ`, OU(1, 1) noise.
    Two,
    /// `4t` vs `4t + 2 sin(t(t+μ)π)`, OU(1, 1) noise.
    Three,
}

impl Model {
    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Model::One),
            2 => Ok(Model::Two),
            3 => Ok(Model::Three),
            _ => Err(MrctError::domain(format!("unknown model {id}, expected 1, 2 or 3"))),
        }
    }

    pub fn id(&self) -> u8 {
        match self {
            Model::One => 1,
            Model::Two => 2,
            Model::Three => 3,
        }
    }

    pub fn kernel(&self) -> KernelSpec {
        match self {
            Model::One => KernelSpec { scale: 0.3, range: 0.3 },
            Model::Two | Model::Three => KernelSpec { scale: 1.0, range: 1.0 },
        }
    }

    pub fn main_mean(&self, t: f64) -> f64 {
        match self {
            Model::One => 30.0 * t * (1.0 - t).powf(1.5),
            Model::Two | Model::Three => 4.0 * t,
        }
    }

    /// Mean of a contaminated curve with sign draw `u ∈ {0,1}` and shift `μ`.
    pub fn contaminated_mean(&self, t: f64, u: bool, mu: f64) -> f64 {
        match self {
            Model::One => 30.0 * t.powf(1.5) * (1.0 - t),
            Model::Two => {
                let sign = if u { -1.0 } else { 1.0 };
                let bump = (0.02 * std::f64::consts::PI).powf(-0.5)
                    * (-(t - mu).powi(2) / 0.02).exp();
                4.0 * t + sign * 1.8 + bump
            }
            // Argument taken literally as t·(t+μ)·π.
            Model::Three => 4.0 * t + 2.0 * (t * (t + mu) * std::f64::consts::PI).sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model: Model,
    pub n: usize,
    pub p: usize,
    pub c: f64,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(model: Model, n: usize, p: usize, c: f64, seed: u64) -> Self {
        Self { model, n, p, c, seed }
    }

    /// `⌊n·c⌋`, guarded against products like `0.29 · 100 = 28.999…`.
    pub fn n_outliers(&self) -> usize {
        (self.n as f64 * self.c + 1e-9).floor() as usize
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::equidistant(self.p, 0.0, 1.0)
    }
}

/// Generates a labeled dataset; labeled rows follow the contaminated process.
pub fn model_dataset(spec: &ModelSpec) -> Result<FunctionalSample> {
    if !(0.0..1.0).contains(&spec.c) {
        return Err(MrctError::domain(format!(
            "contamination rate {} not in [0, 1)",
            spec.c
        )));
    }
    let grid = spec.grid()?;
    let tree = SeedTree::new(spec.seed);
    let mut noise = gp_paths(&spec.model.kernel(), &grid, spec.n, &mut tree.stream("gp"))?;

    let mut rng = tree.stream("contamination");
    let n_out = spec.n_outliers();
    let mut labels = vec![false; spec.n];
    let mut rows: Vec<usize> = index::sample(&mut rng, spec.n, n_out).into_vec();
    rows.sort_unstable();
    for &i in &rows {
        labels[i] = true;
    }

    let t = grid.points();
    for i in 0..spec.n {
        if labels[i] {
            let u: bool = rng.random_bool(0.5);
            let mu: f64 = rng.random_range(0.25..=0.75);
            for (j, &tj) in t.iter().enumerate() {
                noise[(i, j)] += spec.model.contaminated_mean(tj, u, mu);
            }
        } else {
            for (j, &tj) in t.iter().enumerate() {
                noise[(i, j)] += spec.model.main_mean(tj);
            }
        }
    }
    FunctionalSample::build(grid, noise, Some(labels))
}
