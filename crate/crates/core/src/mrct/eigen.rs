use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::Representation;
use crate::error::{MrctError, Result};
use crate::funcdata::{self, FunctionalSample, SubsetH};

/// Truncated spectral decomposition of a trimmed covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// Descending, positive, operator scale (`w` × matrix eigenvalue).
    eigvals: Vec<f64>,
    /// Euclidean-orthonormal columns, one per retained eigenvalue.
    eigvecs: DMatrix<f64>,
    k: f64,
    mean: DVector<f64>,
    subset: SubsetH,
    weight: f64,
}

impl EigenSystem {
    pub fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }

    pub fn eigvecs(&self) -> &DMatrix<f64> {
        &self.eigvecs
    }

    pub fn rank(&self) -> usize {
        self.eigvals.len()
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn subset(&self) -> &SubsetH {
        &self.subset
    }

    /// Inner-product weight the eigenvalues were scaled by.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    /// `k·λ̂_j`, the robust eigenvalue estimates.
    pub fn robust_eigvals(&self) -> Vec<f64> {
        self.eigvals.iter().map(|l| self.k * l).collect()
    }
}

/// Eigendecomposition of a symmetric covariance in matrix units.
///
/// Eigenvalues are multiplied by `weight`; pairs at or below
/// `rank_tol · λ_max` are dropped, and at most `h - 1` are kept.
pub(crate) fn from_covariance(
    cov: DMatrix<f64>,
    weight: f64,
    mean: DVector<f64>,
    subset: &SubsetH,
    rank_tol: f64,
    scale_ref: f64,
) -> Result<EigenSystem> {
    let q = cov.nrows();
    let trace: f64 = cov.diagonal().iter().sum();
    // Residuals all below 1e-10 of the data scale: nothing to decompose.
    let floor = q as f64 * (1e-10 * scale_ref).powi(2);
    if !(trace > floor) {
        return Err(MrctError::DegenerateSubset(format!(
            "covariance of subset with h = {} has zero variance",
            subset.h()
        )));
    }
    let eig = SymmetricEigen::try_new(cov, f64::EPSILON, 0)
        .ok_or_else(|| MrctError::numerical("covariance eigendecomposition did not converge"))?;
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let top = eig.eigenvalues[order[0]];
    if !(top > 0.0) {
        return Err(MrctError::DegenerateSubset("no positive eigenvalue".into()));
    }
    let max_rank = subset.h().saturating_sub(1).min(q);
    let kept: Vec<usize> = order
        .into_iter()
        .take_while(|&j| eig.eigenvalues[j] > rank_tol * top)
        .take(max_rank)
        .collect();
    if kept.is_empty() {
        return Err(MrctError::DegenerateSubset("numerical rank is zero".into()));
    }
    let eigvals = kept.iter().map(|&j| weight * eig.eigenvalues[j]).collect();
    let eigvecs = DMatrix::from_fn(q, kept.len(), |a, c| eig.eigenvectors[(a, kept[c])]);
    Ok(EigenSystem {
        eigvals,
        eigvecs,
        k: 1.0,
        mean,
        subset: subset.clone(),
        weight,
    })
}

pub(crate) fn max_abs(rows: &DMatrix<f64>, idx: &[usize]) -> f64 {
    idx.iter()
        .flat_map(|&i| rows.row(i).iter().map(|v| v.abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

/// Grid-path eigensystem: decomposes the trimmed covariance matrix and puts
/// eigenvalues on operator scale (`Δ ×` matrix eigenvalue).
pub fn eigensystem(sample: &FunctionalSample, subset: &SubsetH, rank_tol: f64) -> Result<EigenSystem> {
    if subset.indices().last().is_some_and(|&i| i >= sample.n()) {
        return Err(MrctError::domain("subset does not belong to this sample"));
    }
    let rows = sample.values();
    let (centered, mean) = funcdata::centered_rows(rows, subset.indices())?;
    let mut cov = centered.tr_mul(&centered) / subset.h() as f64;
    funcdata::symmetrize(&mut cov);
    let scale = max_abs(rows, subset.indices());
    from_covariance(cov, sample.grid().weight(), mean, subset, rank_tol, scale)
}

/// Squared projections `⟨ψ_j, x_i - x̄_H⟩²` of every curve, `n × r` row-major.
#[derive(Debug, Clone)]
pub struct SquaredScores {
    n: usize,
    r: usize,
    data: Vec<f64>,
}

impl SquaredScores {
    pub fn compute<R: Representation + ?Sized>(data: &R, eig: &EigenSystem) -> Self {
        let x = data.coordinates();
        let n = x.nrows();
        let r = eig.rank();
        let centered = DMatrix::from_fn(n, x.ncols(), |i, j| x[(i, j)] - eig.mean[j]);
        let proj = centered * &eig.eigvecs;
        let w = eig.weight;
        let mut out = Vec::with_capacity(n * r);
        for i in 0..n {
            for j in 0..r {
                // ⟨ψ, y⟩ = w Σ ψ y with ψ = u / √w, so the square is w (uᵀy)².
                out.push(w * proj[(i, j)] * proj[(i, j)]);
            }
        }
        Self { n, r, data: out }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.r..(i + 1) * self.r]
    }

    /// `d²_i(a) = Σ_j λ_j / (λ_j + a)² · s_ij` for every curve.
    pub fn distances(&self, eigvals: &[f64], a: f64) -> Vec<f64> {
        let weights: Vec<f64> = eigvals.iter().map(|l| l / ((l + a) * (l + a))).collect();
        (0..self.n)
            .map(|i| self.row(i).iter().zip(&weights).map(|(s, w)| s * w).sum())
            .collect()
    }
}

/// Squared α-Mahalanobis distances of all curves for standardization
/// parameter `a` (the caller passes `α / k`).
pub fn standardized_distances<R: Representation + ?Sized>(
    data: &R,
    eig: &EigenSystem,
    a: f64,
) -> Result<Vec<f64>> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(MrctError::domain(format!(
            "standardization parameter must be positive, got {a}"
        )));
    }
    if data.dim() != eig.eigvecs.nrows() {
        return Err(MrctError::dim("eigensystem does not match the data dimension"));
    }
    Ok(SquaredScores::compute(data, eig).distances(&eig.eigvals, a))
}
