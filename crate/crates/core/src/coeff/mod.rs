//! Basis-expansion path for sparse or irregularly sampled curves.
//!
//! Each curve is least-squares fitted in a B-spline basis, the coefficients
//! are moved to the orthonormalized basis `G^{-1/2}Φ`, and the estimator
//! then runs on the coefficient matrix: in an orthonormal basis the `L²`
//! inner product of two curves is the Euclidean product of their
//! coefficient rows.

mod bspline;

pub use bspline::{basis_eval, gauss_legendre, gram_matrix, orthonormalize, BasisSpec};

use nalgebra::{DMatrix, DVector};

use crate::error::{MrctError, Result};
use crate::funcdata::{self, FunctionalSample, Grid, SubsetH};
use crate::mrct::{self, EigenSystem, MrctConfig, MrctResult, Representation};

/// One irregularly sampled curve, times ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCurve {
    pub id: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Curves with their own observation times.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCurves {
    curves: Vec<SparseCurve>,
}

impl SparseCurves {
    /// Sorts each curve by time and rejects empty curves, duplicate times and
    /// non-finite entries.
    pub fn new(curves: Vec<SparseCurve>) -> Result<Self> {
        if curves.is_empty() {
            return Err(MrctError::domain("no curves"));
        }
        let mut out = Vec::with_capacity(curves.len());
        for c in curves {
            if c.times.len() != c.values.len() {
                return Err(MrctError::dim(format!("curve {}: times and values differ in length", c.id)));
            }
            if c.times.is_empty() {
                return Err(MrctError::domain(format!("curve {} has no observations", c.id)));
            }
            if c.times.iter().chain(&c.values).any(|v| !v.is_finite()) {
                return Err(MrctError::domain(format!("curve {} has non-finite entries", c.id)));
            }
            let mut pairs: Vec<(f64, f64)> = c.times.into_iter().zip(c.values).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(MrctError::domain(format!(
                    "curve {} observed twice at t = {}",
                    c.id, w[0].0
                )));
            }
            let (times, values) = pairs.into_iter().unzip();
            out.push(SparseCurve { id: c.id, times, values });
        }
        Ok(Self { curves: out })
    }

    pub fn curves(&self) -> &[SparseCurve] {
        &self.curves
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Smallest and largest observation time over all curves.
    pub fn time_range(&self) -> (f64, f64) {
        self.curves.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            (lo.min(c.times[0]), hi.max(*c.times.last().unwrap()))
        })
    }

    pub fn min_observations(&self) -> usize {
        self.curves.iter().map(|c| c.times.len()).min().unwrap_or(0)
    }
}

/// Curves as coefficient rows in an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSample {
    basis: Option<BasisSpec>,
    /// Orthonormalized coefficients `C̃ = C G^{1/2}`, one curve per row.
    coeffs: DMatrix<f64>,
    /// `G^{-1/2}`, mapping orthonormal coefficients back to the B-spline ones.
    gram_inv_sqrt: DMatrix<f64>,
    ids: Vec<String>,
}

impl CoefficientSample {
    /// Orthonormalizes raw B-spline coefficients.
    pub fn from_raw(basis: BasisSpec, raw: &DMatrix<f64>) -> Result<Self> {
        if raw.ncols() != basis.len() {
            return Err(MrctError::dim(format!(
                "{} coefficients per curve for {} basis functions",
                raw.ncols(),
                basis.len()
            )));
        }
        let (root, inv) = bspline::gram_roots(&gram_matrix(&basis))?;
        let ids = (0..raw.nrows()).map(|i| i.to_string()).collect();
        Ok(Self { basis: Some(basis), coeffs: raw * root, gram_inv_sqrt: inv, ids })
    }

    /// Coefficients already expressed in some orthonormal system.
    pub fn orthonormal(coeffs: DMatrix<f64>) -> Result<Self> {
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(MrctError::domain("non-finite coefficient"));
        }
        let m = coeffs.ncols();
        let ids = (0..coeffs.nrows()).map(|i| i.to_string()).collect();
        Ok(Self { basis: None, coeffs, gram_inv_sqrt: DMatrix::identity(m, m), ids })
    }

    pub fn basis(&self) -> Option<&BasisSpec> {
        self.basis.as_ref()
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn n(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn m(&self) -> usize {
        self.coeffs.ncols()
    }

    /// B-spline coefficients `C = C̃ G^{-1/2}`.
    pub fn raw_coeffs(&self) -> DMatrix<f64> {
        &self.coeffs * &self.gram_inv_sqrt
    }

    /// Curve values at `t` for every curve.
    pub fn evaluate(&self, t: f64) -> Result<DVector<f64>> {
        let basis = self
            .basis
            .as_ref()
            .ok_or_else(|| MrctError::domain("sample has no basis to evaluate"))?;
        let phi = basis_eval(basis, t)?;
        Ok(&self.coeffs * (&self.gram_inv_sqrt * phi))
    }

    /// Samples every curve on `grid`.
    pub fn to_grid(&self, grid: &Grid) -> Result<FunctionalSample> {
        let mut values = DMatrix::zeros(self.n(), grid.len());
        for (j, &t) in grid.points().iter().enumerate() {
            values.set_column(j, &self.evaluate(t)?);
        }
        FunctionalSample::build(grid.clone(), values, None)
    }
}

/// Ordinary least squares per curve, then orthonormalization.
pub fn fit_coefficients(curves: &SparseCurves, basis: &BasisSpec) -> Result<CoefficientSample> {
    let m = basis.len();
    let mut raw = DMatrix::zeros(curves.len(), m);
    for (i, c) in curves.curves().iter().enumerate() {
        if c.times.len() < m {
            return Err(MrctError::UnderdeterminedCurve {
                curve: c.id.clone(),
                observed: c.times.len(),
                required: m,
            });
        }
        let mut design = DMatrix::zeros(c.times.len(), m);
        for (r, &t) in c.times.iter().enumerate() {
            design.set_row(r, &basis_eval(basis, t)?.transpose());
        }
        let svd = design.svd(true, true);
        let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
        if !(smin > 1e-10 * smax) {
            return Err(MrctError::numerical(format!(
                "curve {}: observation times do not determine {m} basis coefficients",
                c.id
            )));
        }
        let y = DVector::from_column_slice(&c.values);
        let beta = svd.solve(&y, 0.0).map_err(|e| MrctError::numerical(e.to_string()))?;
        raw.set_row(i, &beta.transpose());
    }
    let mut sample = CoefficientSample::from_raw(basis.clone(), &raw)?;
    sample.ids = curves.curves().iter().map(|c| c.id.clone()).collect();
    Ok(sample)
}

/// `(1/h) Cᵀ P C` with the centering projector
/// `P = diag(1_H) - (1/h) 1_H 1_Hᵀ`, restricted to the rows in `H`.
pub fn coeff_trimmed_cov(coeffs: &DMatrix<f64>, subset: &SubsetH) -> Result<DMatrix<f64>> {
    let idx = subset.indices();
    if idx.last().is_some_and(|&i| i >= coeffs.nrows()) {
        return Err(MrctError::domain("subset does not belong to this sample"));
    }
    let h = idx.len();
    let rows = coeffs.select_rows(idx);
    let proj = DMatrix::from_fn(h, h, |a, b| (if a == b { 1.0 } else { 0.0 }) - 1.0 / h as f64);
    let mut cov = rows.transpose() * proj * rows / h as f64;
    funcdata::symmetrize(&mut cov);
    Ok(cov)
}

/// Squared α-Mahalanobis distances of all curves relative to subset `H`.
pub fn coeff_distances(sample: &CoefficientSample, subset: &SubsetH, a: f64) -> Result<Vec<f64>> {
    let eig = sample.eigensystem(subset, 1e-12)?;
    mrct::standardized_distances(sample, &eig, a)
}

/// The estimator on basis coefficients.
pub fn mrct_fit_coeff(sample: &CoefficientSample, cfg: &MrctConfig) -> Result<MrctResult> {
    mrct::mrct_fit(sample, cfg)
}

impl Representation for CoefficientSample {
    fn n(&self) -> usize {
        self.coeffs.nrows()
    }

    fn dim(&self) -> usize {
        self.coeffs.ncols()
    }

    fn eigensystem(&self, subset: &SubsetH, rank_tol: f64) -> Result<EigenSystem> {
        let cov = coeff_trimmed_cov(&self.coeffs, subset)?;
        let mean = funcdata::rows_mean(&self.coeffs, subset.indices())?;
        let scale = mrct::max_abs_rows(&self.coeffs, subset.indices());
        mrct::eigen_from_covariance(cov, 1.0, mean, subset, rank_tol, scale)
    }

    fn coordinates(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    fn weight(&self) -> f64 {
        1.0
    }

    fn subset_covariance(&self, subset: &SubsetH) -> Result<DMatrix<f64>> {
        coeff_trimmed_cov(&self.coeffs, subset)
    }
}
