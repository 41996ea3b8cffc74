//! Detection rates, F-score, covariance ISE, subset overlap and kurtosis.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{MrctError, Result};
use crate::funcdata::SubsetH;

/// Classification rates; a rate is `None` when its class is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfusionRates {
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub tnr: Option<f64>,
}

pub fn confusion_rates(flags: &[bool], labels: &[bool]) -> Result<ConfusionRates> {
    if flags.len() != labels.len() {
        return Err(MrctError::dim(format!(
            "{} flags but {} labels",
            flags.len(),
            labels.len()
        )));
    }
    let mut counts = [[0usize; 2]; 2]; // [label][flag]
    for (&f, &l) in flags.iter().zip(labels) {
        counts[l as usize][f as usize] += 1;
    }
    let rate = |hit: usize, total: usize| (total > 0).then(|| hit as f64 / total as f64);
    let outliers = counts[1][0] + counts[1][1];
    let regulars = counts[0][0] + counts[0][1];
    let tpr = rate(counts[1][1], outliers);
    let fpr = rate(counts[0][1], regulars);
    Ok(ConfusionRates {
        tpr,
        fpr,
        fnr: tpr.map(|t| 1.0 - t),
        tnr: fpr.map(|f| 1.0 - f),
    })
}

/// `TPR / (TPR + (FPR + FNR)/2)`, 0 when the denominator vanishes.
/// `None` if either class was empty.
pub fn f_score(r: &ConfusionRates) -> Option<f64> {
    let (tpr, fpr, fnr) = (r.tpr?, r.fpr?, r.fnr?);
    let denom = tpr + 0.5 * (fpr + fnr);
    Some(if denom > 0.0 { tpr / denom } else { 0.0 })
}

/// Mean squared entrywise difference of two kernel matrices.
pub fn ise(truth: &DMatrix<f64>, estimate: &DMatrix<f64>) -> Result<f64> {
    if truth.shape() != estimate.shape() {
        return Err(MrctError::dim(format!(
            "kernel shapes {:?} and {:?} differ",
            truth.shape(),
            estimate.shape()
        )));
    }
    if truth.is_empty() {
        return Err(MrctError::dim("empty kernel matrices"));
    }
    Ok((truth - estimate).norm_squared() / truth.len() as f64)
}

/// `(O1, O2)`: mean overlap of each subset with `h_opt`, and the size of the
/// common intersection, both relative to `h`.
pub fn subset_overlap(subsets: &[SubsetH], h_opt: &SubsetH) -> Result<(f64, f64)> {
    if subsets.is_empty() {
        return Err(MrctError::domain("no subsets to compare"));
    }
    let h = h_opt.h();
    if let Some(s) = subsets.iter().find(|s| s.h() != h) {
        return Err(MrctError::dim(format!("subset of size {} vs h = {h}", s.h())));
    }
    let o1 = subsets
        .iter()
        .map(|s| s.indices().iter().filter(|i| h_opt.contains(**i)).count() as f64 / h as f64)
        .sum::<f64>()
        / subsets.len() as f64;
    let common = subsets[0]
        .indices()
        .iter()
        .filter(|i| subsets[1..].iter().all(|s| s.contains(**i)))
        .count();
    Ok((o1, common as f64 / h as f64))
}

/// `(m₄ / m₂² − 3)²` with central sample moments.
pub fn excess_kurtosis_sq(values: &[f64]) -> Result<f64> {
    if values.len() < 4 {
        return Err(MrctError::domain("kurtosis needs at least 4 values"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for v in values {
        let d2 = (v - mean).powi(2);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    if !(m2 > 0.0) {
        return Err(MrctError::domain("kurtosis of a constant vector is undefined"));
    }
    Ok((m4 / (m2 * m2) - 3.0).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rates_arithmetic() {
        let mut labels = vec![true; 40];
        labels.extend(vec![false; 160]);
        let mut flags = vec![false; 200];
        flags[..36].iter_mut().for_each(|f| *f = true);
        flags[40..48].iter_mut().for_each(|f| *f = true);
        let r = confusion_rates(&flags, &labels).unwrap();
        assert_relative_eq!(r.tpr.unwrap(), 0.9);
        assert_relative_eq!(r.fpr.unwrap(), 0.05);
        assert_relative_eq!(f_score(&r).unwrap(), 0.9 / 0.975, epsilon = 1e-15);

        let all = confusion_rates(&[true; 200], &labels).unwrap();
        assert_eq!((all.tpr, all.fpr), (Some(1.0), Some(1.0)));
        let perfect = confusion_rates(&labels, &labels).unwrap();
        assert_eq!((perfect.tpr, perfect.fpr), (Some(1.0), Some(0.0)));
        assert_eq!(f_score(&perfect), Some(1.0));
        assert!(confusion_rates(&[true], &[true, false]).is_err());
    }

    #[test]
    fn empty_class_rates_are_absent() {
        let r = confusion_rates(&[false, true], &[false, false]).unwrap();
        assert_eq!(r.tpr, None);
        assert_eq!(r.fnr, None);
        assert_eq!(r.fpr, Some(0.5));
        assert_eq!(f_score(&r), None);
    }

    #[test]
    fn total_miss_scores_zero() {
        let r = ConfusionRates { tpr: Some(0.0), fpr: Some(0.0), fnr: Some(1.0), tnr: Some(1.0) };
        assert_eq!(f_score(&r), Some(0.0));
    }

    #[test]
    fn ise_examples() {
        let a = DMatrix::from_fn(3, 3, |i, j| (i * j) as f64);
        assert_eq!(ise(&a, &a).unwrap(), 0.0);
        assert_relative_eq!(ise(&a, &a.add_scalar(1.0)).unwrap(), 1.0);
        assert!(ise(&a, &DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn overlap_examples() {
        let a = SubsetH::new(vec![0, 1, 2], 6).unwrap();
        let b = SubsetH::new(vec![3, 4, 5], 6).unwrap();
        assert_eq!(subset_overlap(&[a.clone(), a.clone()], &a).unwrap(), (1.0, 1.0));
        assert_eq!(subset_overlap(&[a.clone(), b], &a).unwrap(), (0.5, 0.0));
    }

    #[test]
    fn kurtosis_examples() {
        let two_point: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        assert_relative_eq!(excess_kurtosis_sq(&two_point).unwrap(), 4.0, epsilon = 1e-12);
        assert!(excess_kurtosis_sq(&[2.0; 10]).is_err());
        assert!(excess_kurtosis_sq(&[1.0, 2.0]).is_err());
    }
}
