//! Runs automatic alpha selection and prints the objective over the grid.

use mrct::alpha_select::{default_alpha0, default_alpha_grid, select_alpha};
use mrct::simulate::{model_dataset, Model, ModelSpec};
use mrct::MrctConfig;

fn main() -> mrct::Result<()> {
    let sample = model_dataset(&ModelSpec::new(Model::One, 200, 100, 0.2, 3))?;
    let cfg = MrctConfig::new(sample.n()).with_seed(3);
    let grid = default_alpha_grid();
    let trace = select_alpha(&sample, &grid, default_alpha0(sample.n(), sample.p()), &cfg)?;

    for ((a, g), m) in trace.grid.iter().zip(&trace.g_values).zip(&trace.m_alpha) {
        let mark = if *a == trace.chosen_alpha { " <" } else { "" };
        println!("alpha {a:>10.4}  g {g:>10.5}  m {m:>3}{mark}");
    }
    println!(
        "chosen alpha {:.4} after {} iterations (converged: {})",
        trace.chosen_alpha,
        trace.history.len(),
        trace.converged
    );
    Ok(())
}
