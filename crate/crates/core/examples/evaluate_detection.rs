//! Detection rates and F-score over several seeds at a fixed alpha.

use mrct::metrics::{confusion_rates, f_score};
use mrct::simulate::{model_dataset, Model, ModelSpec};
use mrct::{mrct_fit, MrctConfig};

fn main() -> mrct::Result<()> {
    for model in [Model::One, Model::Two, Model::Three] {
        let mut line = Vec::new();
        for seed in 0..5 {
            let sample = model_dataset(&ModelSpec::new(model, 200, 100, 0.2, seed))?;
            let cfg = MrctConfig::new(200).with_alpha(0.01).with_seed(seed);
            let fit = mrct_fit(&sample, &cfg)?;
            let r = confusion_rates(&fit.flags, sample.labels().unwrap())?;
            line.push(format!(
                "TPR {:.2} FPR {:.3} F {:.3}",
                r.tpr.unwrap(),
                r.fpr.unwrap(),
                f_score(&r).unwrap()
            ));
        }
        println!("model {}: {}", model.id(), line.join(" | "));
    }
    Ok(())
}
