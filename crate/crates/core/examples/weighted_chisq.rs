//! Monte-Carlo median and quantile of a weighted sum of chi-square variables.

use mrct::wchisq::{draw_chisq, wchisq_median, wchisq_quantile};

fn main() -> mrct::Result<()> {
    for weights in [vec![1.0], vec![1.0, 0.5, 0.25], vec![0.1; 3]] {
        let draws = draw_chisq(50_000, weights.len(), 7)?;
        println!(
            "weights {:?}: median {:.4}, 0.99-quantile {:.4}",
            weights,
            wchisq_median(&weights, &draws)?,
            wchisq_quantile(&weights, 0.99, &draws)?
        );
    }
    Ok(())
}
