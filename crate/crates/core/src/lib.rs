//! Robust covariance estimation and outlier detection for functional data
//! with the Minimum Regularized Covariance Trace (MRCT) estimator.
//!
//! Curves observed on a common grid live in [`FunctionalSample`]; sparse or
//! irregular curves go through [`coeff`] and become a
//! [`coeff::CoefficientSample`]. Both feed [`mrct_fit`], which returns the
//! optimal subset, robust squared α-Mahalanobis distances and outlier flags.
//! [`alpha_select`] chooses the regularization parameter and scans subset
//! sizes.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alpha_select;
pub mod cli;
pub mod coeff;
pub mod error;
pub mod funcdata;
pub mod metrics;
pub mod mrct;
pub mod rng;
pub mod simulate;
pub mod wchisq;

pub use error::{MrctError, Result};
pub use funcdata::{FunctionalSample, Grid, SubsetH};
pub use mrct::{mrct_fit, AlphaSpec, MrctConfig, MrctResult, Selection};
