//! Draws a sample from each simulation model and summarizes it.

use mrct::simulate::{model_dataset, Model, ModelSpec};

fn main() -> mrct::Result<()> {
    for id in 1..=3 {
        let spec = ModelSpec::new(Model::from_id(id)?, 200, 100, 0.2, 42);
        let s = model_dataset(&spec)?;
        let labels = s.labels().expect("simulated data is labeled");
        let outliers = labels.iter().filter(|l| **l).count();
        let mean_at = |j: usize, out: bool| {
            let rows: Vec<f64> = (0..s.n()).filter(|i| labels[*i] == out).map(|i| s.values()[(i, j)]).collect();
            rows.iter().sum::<f64>() / rows.len() as f64
        };
        println!(
            "model {id}: {} curves on {} points, {outliers} outliers; mean at t=0.5: regular {:.3}, outlying {:.3}",
            s.n(),
            s.p(),
            mean_at(s.p() / 2, false),
            mean_at(s.p() / 2, true)
        );
    }
    Ok(())
}
