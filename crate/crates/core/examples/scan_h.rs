//! Refits over a range of subset sizes and reports the largest objective jump.

use mrct::alpha_select::h_scan;
use mrct::simulate::{model_dataset, Model, ModelSpec};
use mrct::MrctConfig;

fn main() -> mrct::Result<()> {
    let sample = model_dataset(&ModelSpec::new(Model::One, 200, 100, 0.2, 0))?;
    let cfg = MrctConfig::new(sample.n()).with_seed(0).with_starts(3);
    let h_values: Vec<usize> = (100..=200).step_by(5).collect();
    let trace = h_scan(&sample, 0.05, &h_values, &cfg)?;

    for (i, h) in trace.h_values.iter().enumerate() {
        let shift = i.checked_sub(1).map_or(String::from("-"), |j| format!("{:.4}", trace.cov_shift[j]));
        println!("h {h:>3}  objective {:>8.4}  cov shift {shift:>8}  flagged {}", trace.objective[i], trace.n_flagged[i]);
    }
    if let Some(i) = trace.largest_jump() {
        println!("largest jump between h = {} and h = {}", trace.h_values[i], trace.h_values[i + 1]);
    }
    Ok(())
}
