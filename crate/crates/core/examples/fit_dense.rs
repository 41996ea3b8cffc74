//! Fits the estimator at a fixed alpha and lists the flagged curves.

use mrct::simulate::{model_dataset, Model, ModelSpec};
use mrct::{mrct_fit, MrctConfig};

fn main() -> mrct::Result<()> {
    let sample = model_dataset(&ModelSpec::new(Model::Two, 200, 100, 0.2, 1))?;
    let cfg = MrctConfig::new(sample.n()).with_alpha(0.01).with_seed(1);
    let fit = mrct_fit(&sample, &cfg)?;

    println!("h = {}, k = {:.4}, cutoff = {:.4}", fit.h(), fit.k, fit.cutoff);
    println!("converged: {} ({} of {} chains at a fixed point)", fit.converged, fit.n_starts_converged, fit.chains.len());
    let flagged: Vec<usize> = (0..sample.n()).filter(|i| fit.flags[*i]).collect();
    println!("{} flagged: {:?}", flagged.len(), flagged);
    let top: Vec<String> = fit.robust_eigvals().iter().take(5).map(|v| format!("{v:.4}")).collect();
    println!("leading robust eigenvalues: {}", top.join(", "));
    Ok(())
}
