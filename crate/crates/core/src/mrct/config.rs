use serde::{Deserialize, Serialize};

use crate::error::{MrctError, Result};

/// Regularization parameter: a fixed value or automatic selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSpec {
    Fixed(f64),
    Auto,
}

/// Rule for picking `H_opt` among the fixed points found by the chains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Smallest mean robust distance over the subset.
    Trace,
    /// Smallest mean over the `⌈q·h⌉` smallest robust distances in the subset.
    TraceQ(f64),
    /// Largest squared excess kurtosis of all `n` robust distances.
    Kurtosis,
}

impl std::str::FromStr for Selection {
    type Err = MrctError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trace" => Ok(Selection::Trace),
            "kurtosis" => Ok(Selection::Kurtosis),
            _ => {
                let q = s
                    .strip_prefix("trace-q=")
                    .ok_or_else(|| MrctError::domain(format!("unknown selection rule '{s}'")))?;
                let q: f64 = q
                    .parse()
                    .map_err(|_| MrctError::domain(format!("bad trace-q level '{q}'")))?;
                if !(q > 0.0 && q <= 1.0) {
                    return Err(MrctError::domain(format!("trace-q level {q} not in (0, 1]")));
                }
                Ok(Selection::TraceQ(q))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MrctConfig {
    pub h: usize,
    pub alpha: AlphaSpec,
    /// Random starting subsets, in addition to the median start.
    pub n_starts: usize,
    pub eps_k: f64,
    pub max_k_iters: usize,
    pub max_outer_iters: usize,
    pub cutoff_q: f64,
    /// Monte-Carlo rows for the consistency-factor median.
    pub mc_n: usize,
    /// Monte-Carlo rows for the outlier cutoff.
    pub mc_n_cutoff: usize,
    pub selection: Selection,
    pub rank_tol: f64,
    pub seed: u64,
}

impl MrctConfig {
    /// Defaults for a sample of `n` curves with `h = ⌊0.75 n⌋`.
    pub fn new(n: usize) -> Self {
        Self {
            h: default_h(n, 0.75),
            alpha: AlphaSpec::Auto,
            n_starts: 10,
            eps_k: 1e-6,
            max_k_iters: 100,
            max_outer_iters: 50,
            cutoff_q: 0.99,
            mc_n: 2000,
            mc_n_cutoff: 2000,
            selection: Selection::Trace,
            rank_tol: 1e-12,
            seed: 0,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = AlphaSpec::Fixed(alpha);
        self
    }

    pub fn with_auto_alpha(mut self) -> Self {
        self.alpha = AlphaSpec::Auto;
        self
    }

    pub fn with_h(mut self, h: usize) -> Self {
        self.h = h;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, n_starts: usize) -> Self {
        self.n_starts = n_starts;
        self
    }

    pub fn with_selection(mut self, selection: Selection) -> Self {
        self.selection = selection;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let lower = n.div_ceil(2);
        if self.h < lower || self.h > n || self.h < 2 {
            return Err(MrctError::domain(format!(
                "h = {} outside [{lower}, {n}] (and h ≥ 2)",
                self.h
            )));
        }
        if let AlphaSpec::Fixed(a) = self.alpha {
            if !(a > 0.0) || !a.is_finite() {
                return Err(MrctError::domain(format!("alpha must be positive, got {a}")));
            }
        }
        if !(self.cutoff_q > 0.0 && self.cutoff_q < 1.0) {
            return Err(MrctError::domain(format!(
                "cutoff quantile {} not in (0, 1)",
                self.cutoff_q
            )));
        }
        if !(self.eps_k > 0.0) || self.max_k_iters == 0 || self.max_outer_iters == 0 {
            return Err(MrctError::domain("iteration limits must be positive"));
        }
        if self.mc_n == 0 || self.mc_n_cutoff == 0 {
            return Err(MrctError::domain("Monte-Carlo sizes must be positive"));
        }
        if !(self.rank_tol >= 0.0 && self.rank_tol < 1.0) {
            return Err(MrctError::domain("rank tolerance must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// `⌊frac · n⌋`, raised to `⌈n/2⌉` if needed.
pub fn default_h(n: usize, frac: f64) -> usize {
    let h = (frac * n as f64 + 1e-9).floor() as usize;
    h.max(n.div_ceil(2)).min(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_parsing() {
        assert_eq!("trace".parse::<Selection>().unwrap(), Selection::Trace);
        assert_eq!("kurtosis".parse::<Selection>().unwrap(), Selection::Kurtosis);
        assert_eq!(
            "trace-q=0.75".parse::<Selection>().unwrap(),
            Selection::TraceQ(0.75)
        );
        assert!("trace-q=0".parse::<Selection>().is_err());
        assert!("median".parse::<Selection>().is_err());
    }

    #[test]
    fn defaults_and_validation() {
        let cfg = MrctConfig::new(200);
        assert_eq!(cfg.h, 150);
        assert!(cfg.validate(200).is_ok());
        assert!(cfg.clone().with_h(99).validate(200).is_err());
        assert!(cfg.clone().with_alpha(0.0).validate(200).is_err());
        assert_eq!(default_h(10, 0.5), 5);
        assert_eq!(default_h(11, 0.1), 6);
    }
}
