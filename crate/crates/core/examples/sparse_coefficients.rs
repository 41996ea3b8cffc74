//! Smooths irregularly observed curves in a B-spline basis and fits the
//! estimator on the coefficients.

use mrct::coeff::{fit_coefficients, mrct_fit_coeff, BasisSpec, SparseCurve, SparseCurves};
use mrct::MrctConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> mrct::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let curves: Vec<SparseCurve> = (0..60)
        .map(|i| {
            let amp: f64 = rng.random_range(0.5..1.5);
            // One jittered observation per cell, so every knot interval is covered.
            let count = rng.random_range(12..20);
            let times: Vec<f64> = (0..count).map(|j| (j as f64 + rng.random_range(0.0..1.0)) / count as f64).collect();
            let values = times
                .iter()
                .map(|t| {
                    let base = amp * (2.0 * std::f64::consts::PI * t).sin();
                    // The first five curves carry a linear trend.
                    let trend = if i < 5 { 3.0 * t } else { 0.0 };
                    base + trend + rng.random_range(-0.05..0.05)
                })
                .collect();
            SparseCurve { id: format!("curve{i}"), times, values }
        })
        .collect();
    let curves = SparseCurves::new(curves)?;

    // Cap the basis size by the sparsest curve.
    let m = 8.min(curves.min_observations());
    let (a, b) = curves.time_range();
    let basis = BasisSpec::cubic(m, a, b)?;
    let sample = fit_coefficients(&curves, &basis)?;
    let fit = mrct_fit_coeff(&sample, &MrctConfig::new(sample.n()).with_alpha(0.01))?;

    let flagged: Vec<&str> = sample.ids().iter().zip(&fit.flags).filter(|(_, f)| **f).map(|(id, _)| id.as_str()).collect();
    println!("{} basis functions; flagged {:?}", m, flagged);
    Ok(())
}
