//! Discretized functional samples and the quadrature inner product.
//!
//! Curves live on a common grid `t_1 < ... < t_p`. Integrals are rectangle
//! sums with a single weight `Δ`, so `⟨f, g⟩ = Δ Σ_j f(t_j) g(t_j)`. Matrices
//! built here (covariances) stay in kernel units; the `Δ` factor is applied to
//! eigenvalues by the estimator, exactly once.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{MrctError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    weight: f64,
}

impl Grid {
    /// Grid with the default weight `Δ = (t_p - t_1) / p`.
    pub fn new(points: Vec<f64>) -> Result<Self> {
        check_points(&points)?;
        let p = points.len();
        let weight = (points[p - 1] - points[0]) / p as f64;
        Ok(Self { points, weight })
    }

    /// Grid whose points sample the interval `[a, b]`, with `Δ = (b - a) / p`.
    ///
    /// Useful for midpoint grids, where the rectangle sum is the midpoint rule
    /// for `∫_a^b`. All points must lie in `[a, b]`.
    pub fn on_interval(points: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        check_points(&points)?;
        if !(a < b) || points[0] < a || points[points.len() - 1] > b {
            return Err(MrctError::domain(format!(
                "grid points must lie within [{a}, {b}]"
            )));
        }
        let weight = (b - a) / points.len() as f64;
        Ok(Self { points, weight })
    }

    /// `p` equidistant points on `[a, b]`, endpoints included.
    pub fn equidistant(p: usize, a: f64, b: f64) -> Result<Self> {
        if p < 2 {
            return Err(MrctError::domain("a grid needs at least two points"));
        }
        let step = (b - a) / (p - 1) as f64;
        let points = (0..p).map(|j| a + step * j as f64).collect();
        Self::new(points)
    }

    /// `p` cell midpoints of an equal partition of `[a, b]`.
    pub fn midpoints(p: usize, a: f64, b: f64) -> Result<Self> {
        if p < 2 {
            return Err(MrctError::domain("a grid needs at least two points"));
        }
        let step = (b - a) / p as f64;
        let points = (0..p).map(|j| a + step * (j as f64 + 0.5)).collect();
        Self::on_interval(points, a, b)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Quadrature weight `Δ`.
    pub fn weight(&self) -> f64 {
        self.weight
    }
}

fn check_points(points: &[f64]) -> Result<()> {
    if points.len() < 2 {
        return Err(MrctError::domain("a grid needs at least two points"));
    }
    if points.iter().any(|t| !t.is_finite()) {
        return Err(MrctError::domain("grid points must be finite"));
    }
    if let Some(j) = points.windows(2).position(|w| w[1] <= w[0]) {
        return Err(MrctError::domain(format!(
            "grid points must be strictly increasing (position {})",
            j + 1
        )));
    }
    Ok(())
}

/// `n` curves observed on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSample {
    grid: Grid,
    values: DMatrix<f64>,
    labels: Option<Vec<bool>>,
}

impl FunctionalSample {
    /// Rows of `values` are curves. Rejects non-finite entries and `n < 2`.
    pub fn new(grid: Grid, values: DMatrix<f64>, labels: Option<Vec<bool>>) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(MrctError::domain(format!(
                "a functional sample needs at least two curves, got {}",
                values.nrows()
            )));
        }
        Self::build(grid, values, labels)
    }

    /// Like [`FunctionalSample::new`] but allows fewer than two curves; used
    /// by generators.
    pub(crate) fn build(
        grid: Grid,
        values: DMatrix<f64>,
        labels: Option<Vec<bool>>,
    ) -> Result<Self> {
        if values.ncols() != grid.len() {
            return Err(MrctError::dim(format!(
                "curves have {} values but the grid has {} points",
                values.ncols(),
                grid.len()
            )));
        }
        if let Some((i, j)) = first_non_finite(&values) {
            return Err(MrctError::domain(format!(
                "non-finite value in curve {i} at grid index {j}"
            )));
        }
        if let Some(l) = &labels {
            if l.len() != values.nrows() {
                return Err(MrctError::dim(format!(
                    "{} labels for {} curves",
                    l.len(),
                    values.nrows()
                )));
            }
        }
        Ok(Self {
            grid,
            values,
            labels,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn curve(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    pub fn with_labels(mut self, labels: Option<Vec<bool>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != self.n() {
                return Err(MrctError::dim("label count does not match curve count"));
            }
        }
        self.labels = labels;
        Ok(self)
    }

    /// Sample with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::build(self.grid.clone(), &self.values * factor, self.labels.clone())
    }

    /// Sample whose row `i` is row `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(MrctError::dim("permutation length does not match n"));
        }
        let values = DMatrix::from_fn(self.n(), self.p(), |i, j| self.values[(perm[i], j)]);
        let labels = self
            .labels
            .as_ref()
            .map(|l| perm.iter().map(|&i| l[i]).collect());
        Self::build(self.grid.clone(), values, labels)
    }
}

fn first_non_finite(m: &DMatrix<f64>) -> Option<(usize, usize)> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if !m[(i, j)].is_finite() {
                return Some((i, j));
            }
        }
    }
    None
}

/// Index set of `h` distinct rows, `⌈n/2⌉ ≤ h ≤ n`, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct SubsetH {
    indices: Vec<usize>,
}

impl SubsetH {
    /// Validates against a sample of `n` curves. Indices may come in any order.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(MrctError::domain("subset indices must be distinct"));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(MrctError::domain(format!(
                    "subset index {last} out of range for n = {n}"
                )));
            }
        }
        let h = indices.len();
        let lower = n.div_ceil(2);
        if h < lower || h > n || h == 0 {
            return Err(MrctError::domain(format!(
                "subset size h = {h} outside [{lower}, {n}]"
            )));
        }
        Ok(Self { indices })
    }

    pub fn all(n: usize) -> Result<Self> {
        Self::new((0..n).collect(), n)
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn h(&self) -> usize {
        self.indices.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &i in &self.indices {
            m[i] = true;
        }
        m
    }
}

/// `Δ Σ_j f(t_j) g(t_j)`.
pub fn inner_product(f: &[f64], g: &[f64], grid: &Grid) -> Result<f64> {
    if f.len() != grid.len() || g.len() != grid.len() {
        return Err(MrctError::dim(format!(
            "inner product of curves with {} and {} values on a {}-point grid",
            f.len(),
            g.len(),
            grid.len()
        )));
    }
    Ok(grid.weight() * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>())
}

pub fn trimmed_mean(sample: &FunctionalSample, subset: &SubsetH) -> Result<DVector<f64>> {
    rows_mean(sample.values(), subset.indices())
}

/// `(1/h) Σ_{i∈H} (x_i - x̄_H)(x_i - x̄_H)ᵀ` in kernel units.
pub fn trimmed_cov_matrix(sample: &FunctionalSample, subset: &SubsetH) -> Result<DMatrix<f64>> {
    rows_cov(sample.values(), subset.indices())
}

pub(crate) fn rows_mean(rows: &DMatrix<f64>, idx: &[usize]) -> Result<DVector<f64>> {
    if idx.is_empty() {
        return Err(MrctError::domain("mean over an empty subset"));
    }
    let mut mean = DVector::zeros(rows.ncols());
    for &i in idx {
        mean += rows.row(i).transpose();
    }
    Ok(mean / idx.len() as f64)
}

/// Rows of `idx` minus their mean, as an `h × q` matrix.
pub(crate) fn centered_rows(rows: &DMatrix<f64>, idx: &[usize]) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let mean = rows_mean(rows, idx)?;
    let centered = DMatrix::from_fn(idx.len(), rows.ncols(), |r, j| rows[(idx[r], j)] - mean[j]);
    Ok((centered, mean))
}

pub(crate) fn rows_cov(rows: &DMatrix<f64>, idx: &[usize]) -> Result<DMatrix<f64>> {
    let (centered, _) = centered_rows(rows, idx)?;
    let mut cov = centered.tr_mul(&centered) / idx.len() as f64;
    symmetrize(&mut cov);
    Ok(cov)
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let q = m.nrows();
    for a in 0..q {
        for b in (a + 1)..q {
            let v = 0.5 * (m[(a, b)] + m[(b, a)]);
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
}

/// Plain sample covariance `(1/n) Σ (x_i - x̄)(x_i - x̄)ᵀ` over the given rows.
pub fn sample_covariance(sample: &FunctionalSample, rows: &[usize]) -> Result<DMatrix<f64>> {
    rows_cov(sample.values(), rows)
}
