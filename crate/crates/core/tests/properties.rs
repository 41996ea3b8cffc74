use mrct::alpha_select::{partition_objective, standardized_eigvals};
use mrct::cli::report::Sig17;
use mrct::coeff::{basis_eval, BasisSpec};
use mrct::funcdata::{FunctionalSample, Grid, SubsetH};
use mrct::metrics::confusion_rates;
use mrct::mrct::{c_step, MrctEngine};
use mrct::wchisq::{draw_chisq, wchisq_quantile};
use mrct::MrctConfig;
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Descending nonnegative sequences with a positive head.
fn spectrum() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..10.0f64, 1..25).prop_map(|mut v| {
        v.sort_by(|a, b| b.total_cmp(a));
        v[0] += 0.1;
        v
    })
}

/// Brute-force split search, written independently of the library's
/// running sums.
fn exhaustive(lst: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY, 0.0);
    for m in 1..=lst.len() {
        let c = lst[..m].iter().sum::<f64>() / m as f64;
        let v: f64 = lst[..m].iter().map(|x| (x - c).powi(2)).sum::<f64>()
            + lst[m..].iter().map(|x| x * x).sum::<f64>();
        if v < best.1 {
            best = (m, v, c);
        }
    }
    (best.0, best.1 / (best.2 * best.2))
}

proptest! {
    #[test]
    fn standardization_is_monotone_and_bounded(v in spectrum(), alpha in 1e-4..1e3f64) {
        let st = standardized_eigvals(&v, alpha);
        for w in st.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        for x in &st {
            prop_assert!((0.0..1.0).contains(x));
        }
    }

    #[test]
    fn partition_matches_exhaustive_scan(v in spectrum(), alpha in 1e-3..1e2f64) {
        let st = standardized_eigvals(&v, alpha);
        let (m, g) = partition_objective(&st).unwrap();
        let (m2, g2) = exhaustive(&st);
        prop_assert_eq!(m, m2);
        prop_assert!((g - g2).abs() <= 1e-9 * g2.max(1.0));
    }

    #[test]
    fn g_is_scale_invariant(v in spectrum(), c in 1e-3..1e3f64) {
        let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
        let (m1, g1) = partition_objective(&v).unwrap();
        let (m2, g2) = partition_objective(&scaled).unwrap();
        prop_assert_eq!(m1, m2);
        prop_assert!((g1 - g2).abs() <= 1e-9 * g1.max(1e-12));
    }

    #[test]
    fn sig17_round_trips(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        let parsed: f64 = Sig17(v).text().unwrap().parse().unwrap();
        prop_assert_eq!(parsed.to_bits(), v.to_bits());
    }

    #[test]
    fn basis_is_a_partition_of_unity(m in 4usize..20, t in 0.0..=1.0f64) {
        let b = BasisSpec::cubic(m, 0.0, 1.0).unwrap();
        let v = basis_eval(&b, t).unwrap();
        prop_assert!(v.iter().all(|x| *x >= -1e-14));
        prop_assert!((v.sum() - 1.0).abs() < 1e-12);
        prop_assert!(v.iter().filter(|x| **x != 0.0).count() <= 4);
    }

    #[test]
    fn rates_are_complementary(bits in prop::collection::vec(any::<(bool, bool)>(), 1..60)) {
        let (flags, labels): (Vec<bool>, Vec<bool>) = bits.into_iter().unzip();
        let r = confusion_rates(&flags, &labels).unwrap();
        if let (Some(t), Some(f)) = (r.tpr, r.fnr) {
            prop_assert!((t + f - 1.0).abs() < 1e-15);
        }
        prop_assert_eq!(r.tpr.is_some(), labels.iter().any(|l| *l));
        prop_assert_eq!(r.fpr.is_some(), labels.iter().any(|l| !*l));
    }

    #[test]
    fn weighted_quantile_is_monotone(
        w in prop::collection::vec(0.01..2.0f64, 1..6),
        q1 in 0.05..0.95f64,
        dq in 0.0..0.04f64,
    ) {
        let draws = draw_chisq(500, w.len(), 3).unwrap();
        let a = wchisq_quantile(&w, q1, &draws).unwrap();
        let b = wchisq_quantile(&w, q1 + dq, &draws).unwrap();
        prop_assert!(a <= b);
        prop_assert!(a >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn c_step_returns_h_smallest(
        vals in prop::collection::vec(-3.0..3.0f64, 14 * 6),
        alpha in 0.01..3.0f64,
        seed in 0u64..100,
    ) {
        let (n, p) = (14, 6);
        let sample = FunctionalSample::new(
            Grid::equidistant(p, 0.0, 1.0).unwrap(),
            DMatrix::from_row_slice(n, p, &vals),
            None,
        )
        .unwrap();
        let cfg = MrctConfig::new(n).with_seed(seed);
        let engine = MrctEngine::new(&sample, &cfg, alpha).unwrap();
        let h0 = SubsetH::new((0..cfg.h).collect(), n).unwrap();
        let step = c_step(&sample, &h0, alpha, &cfg, engine.draws()).unwrap();
        prop_assert_eq!(step.subset.h(), cfg.h);
        prop_assert!(step.distances.iter().all(|d| *d >= 0.0));
        let worst_in = step.subset.indices().iter().map(|i| step.distances[*i]).fold(0.0, f64::max);
        for i in (0..n).filter(|i| !step.subset.contains(*i)) {
            prop_assert!(step.distances[i] >= worst_in);
        }
    }

    #[test]
    fn fit_is_permutation_equivariant(
        vals in prop::collection::vec(-3.0..3.0f64, 12 * 5),
        alpha in 0.05..2.0f64,
    ) {
        let (n, p) = (12, 5);
        let sample = FunctionalSample::new(
            Grid::equidistant(p, 0.0, 1.0).unwrap(),
            DMatrix::from_row_slice(n, p, &vals),
            None,
        )
        .unwrap();
        // Only the median start, which does not depend on row order.
        let cfg = MrctConfig::new(n).with_starts(0);
        let a = MrctEngine::new(&sample, &cfg, alpha).unwrap().fit().unwrap();
        let perm: Vec<usize> = (0..n).rev().collect();
        let b = MrctEngine::new(&sample.permuted(&perm).unwrap(), &cfg, alpha).unwrap().fit().unwrap();
        for (i, &j) in perm.iter().enumerate() {
            prop_assert!((a.distances[j] - b.distances[i]).abs() <= 1e-9 * (1.0 + a.distances[j]));
        }
    }
}
