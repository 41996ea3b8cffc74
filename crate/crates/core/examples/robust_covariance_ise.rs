//! Compares covariance estimates against the true kernel by integrated
//! squared error.

use mrct::funcdata::sample_covariance;
use mrct::metrics::ise;
use mrct::mrct::robust_covariance;
use mrct::simulate::{kernel_matrix, model_dataset, Model, ModelSpec};
use mrct::{mrct_fit, MrctConfig};

fn main() -> mrct::Result<()> {
    let model = Model::One;
    for seed in 0..5 {
        let sample = model_dataset(&ModelSpec::new(model, 200, 100, 0.2, seed))?;
        let fit = mrct_fit(&sample, &MrctConfig::new(200).with_alpha(0.05).with_seed(seed))?;
        let truth = kernel_matrix(&model.kernel(), sample.grid());
        let clean: Vec<usize> = (0..200).filter(|i| !fit.flags[*i]).collect();
        let all: Vec<usize> = (0..200).collect();
        println!(
            "seed {seed}: ISE full {:.5}, non-flagged {:.5}, k·C_H {:.5}",
            ise(&truth, &sample_covariance(&sample, &all)?)?,
            ise(&truth, &sample_covariance(&sample, &clean)?)?,
            ise(&truth, &robust_covariance(&sample, &fit)?)?
        );
    }
    Ok(())
}
