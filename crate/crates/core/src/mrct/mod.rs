//! The MRCT estimator: α-standardized distances, the consistency factor,
//! concentration steps, multi-start search and outlier cutoffs.
//!
//! Everything here is written against [`Representation`], which abstracts
//! how a subset's covariance eigensystem and the projections of all curves
//! onto it are computed. Discretized curves ([`FunctionalSample`]) and
//! basis coefficients ([`crate::coeff::CoefficientSample`]) both implement it,
//! so the two paths share one orchestration.

mod config;
mod eigen;
mod fit;

pub use config::{AlphaSpec, MrctConfig, Selection};
pub use eigen::{eigensystem, standardized_distances, EigenSystem, SquaredScores};
pub use fit::{
    c_step, cutoff, flag_outliers, mrct_fit, robust_covariance, solve_k, CStep, ChainOutcome,
    ChainStart, ChainSummary, KSolution, MrctEngine, MrctResult,
};
pub use config::default_h;

pub(crate) use eigen::{from_covariance as eigen_from_covariance, max_abs as max_abs_rows};

use nalgebra::DMatrix;

use crate::error::Result;
use crate::funcdata::{FunctionalSample, SubsetH};

/// A sample of curves in some finite coordinate system with an inner product
/// `⟨x, y⟩ = w · xᵀy`.
pub trait Representation {
    fn n(&self) -> usize;

    /// Number of coordinates per curve (grid points or basis functions).
    fn dim(&self) -> usize;

    /// Covariance eigensystem of the subset, eigenvalues on operator scale,
    /// `k = 1`.
    fn eigensystem(&self, subset: &SubsetH, rank_tol: f64) -> Result<EigenSystem>;

    /// Row-major coordinates, one curve per row.
    fn coordinates(&self) -> &DMatrix<f64>;

    /// Inner-product weight `w`.
    fn weight(&self) -> f64;

    /// Covariance of the subset in the representation's native (kernel) units.
    fn subset_covariance(&self, subset: &SubsetH) -> Result<DMatrix<f64>>;
}

impl Representation for FunctionalSample {
    fn n(&self) -> usize {
        FunctionalSample::n(self)
    }

    fn dim(&self) -> usize {
        self.p()
    }

    fn eigensystem(&self, subset: &SubsetH, rank_tol: f64) -> Result<EigenSystem> {
        eigen::eigensystem(self, subset, rank_tol)
    }

    fn coordinates(&self) -> &DMatrix<f64> {
        self.values()
    }

    fn weight(&self) -> f64 {
        self.grid().weight()
    }

    fn subset_covariance(&self, subset: &SubsetH) -> Result<DMatrix<f64>> {
        crate::funcdata::trimmed_cov_matrix(self, subset)
    }
}
