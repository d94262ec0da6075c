use pauc::metrics::{empirical_auc, empirical_pauc, pauc_by_integration, roc_curve, tpr_at_fpr};
use pauc::{PaucRange, ScoreAssignment};
use proptest::prelude::*;

/// Area under the lower staircase over [alpha, beta], one rank cell at a time.
/// On cell j the TPR is the share of positives strictly above the j-th
/// highest negative.
fn cell_oracle(pos: &[f64], neg: &[f64], alpha: f64, beta: f64) -> f64 {
    let mut sorted = neg.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let n = sorted.len() as f64;
    let mut area = 0.0;
    for (j, &v) in sorted.iter().enumerate() {
        let lo = (j as f64 / n).max(alpha);
        let hi = ((j + 1) as f64 / n).min(beta);
        if hi > lo {
            let tpr = pos.iter().filter(|&&p| p > v).count() as f64 / pos.len() as f64;
            area += (hi - lo) * tpr;
        }
    }
    area / (beta - alpha)
}

fn pair_count_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let wins: usize = pos.iter().map(|p| neg.iter().filter(|&n| p > n).count()).sum();
    wins as f64 / (pos.len() * neg.len()) as f64
}

/// Distinct scores: a random permutation of 0..n scaled into an interval.
fn tie_free(n_pos: usize, n_neg: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    Just((0..n_pos + n_neg).collect::<Vec<_>>()).prop_shuffle().prop_map(move |perm| {
        let v: Vec<f64> = perm.iter().map(|&i| i as f64 * 0.37 - 3.0).collect();
        (v[..n_pos].to_vec(), v[n_pos..].to_vec())
    })
}

fn scores() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=50, 1usize..=50).prop_flat_map(|(p, n)| tie_free(p, n))
}

fn with_ties() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    let v = prop::collection::vec(0i32..6, 1..30);
    (v.clone(), v).prop_map(|(p, n)| {
        (p.into_iter().map(f64::from).collect(), n.into_iter().map(f64::from).collect())
    })
}

fn range() -> impl Strategy<Value = (f64, f64)> {
    (0.0..1.0f64, 0.0..1.0f64)
        .prop_filter("distinct", |(a, b)| (a - b).abs() > 1e-6)
        .prop_map(|(a, b)| (a.min(b), a.max(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn estimator_matches_cell_oracle((pos, neg) in scores(), (a, b) in range()) {
        let sa = ScoreAssignment::new(pos.clone(), neg.clone()).unwrap();
        let got = empirical_pauc(&sa, PaucRange::new(a, b).unwrap());
        prop_assert!((got - cell_oracle(&pos, &neg, a, b)).abs() <= 1e-10);
    }

    #[test]
    fn estimator_matches_integration((pos, neg) in scores(), (a, b) in range()) {
        let sa = ScoreAssignment::new(pos, neg).unwrap();
        let r = PaucRange::new(a, b).unwrap();
        prop_assert!((empirical_pauc(&sa, r) - pauc_by_integration(&roc_curve(&sa), r)).abs() <= 1e-10);
    }

    #[test]
    fn ties_match_cell_oracle((pos, neg) in with_ties(), (a, b) in range()) {
        let sa = ScoreAssignment::new(pos.clone(), neg.clone()).unwrap();
        let got = empirical_pauc(&sa, PaucRange::new(a, b).unwrap());
        prop_assert!((got - cell_oracle(&pos, &neg, a, b)).abs() <= 1e-10);
    }

    #[test]
    fn full_range_is_auc((pos, neg) in with_ties()) {
        let sa = ScoreAssignment::new(pos.clone(), neg.clone()).unwrap();
        let auc = empirical_auc(&sa);
        prop_assert!((auc - pair_count_auc(&pos, &neg)).abs() <= 1e-12);
        prop_assert!((empirical_pauc(&sa, PaucRange::FULL) - auc).abs() <= 1e-12);
    }

    #[test]
    fn bounded((pos, neg) in with_ties(), (a, b) in range()) {
        let sa = ScoreAssignment::new(pos, neg).unwrap();
        let v = empirical_pauc(&sa, PaucRange::new(a, b).unwrap());
        prop_assert!((0.0..=1.0).contains(&v));
    }

    /// Splitting the band at an interior point gives the width-weighted sum.
    #[test]
    fn additive_over_bands((pos, neg) in scores(), (a, b) in range(), t in 0.01..0.99f64) {
        let m = a + t * (b - a);
        prop_assume!(m - a > 1e-9 && b - m > 1e-9);
        let sa = ScoreAssignment::new(pos, neg).unwrap();
        let whole = empirical_pauc(&sa, PaucRange::new(a, b).unwrap()) * (b - a);
        let left = empirical_pauc(&sa, PaucRange::new(a, m).unwrap()) * (m - a);
        let right = empirical_pauc(&sa, PaucRange::new(m, b).unwrap()) * (b - m);
        prop_assert!((whole - left - right).abs() <= 1e-10);
    }

    #[test]
    fn invariant_under_increasing_maps((pos, neg) in with_ties(), (a, b) in range()) {
        let r = PaucRange::new(a, b).unwrap();
        let sa = ScoreAssignment::new(pos.clone(), neg.clone()).unwrap();
        let map = |v: &f64| (0.5 * v).exp() * 3.0 - 7.0;
        let mapped = ScoreAssignment::new(pos.iter().map(map).collect(), neg.iter().map(map).collect()).unwrap();
        prop_assert!((empirical_pauc(&sa, r) - empirical_pauc(&mapped, r)).abs() <= 1e-12);
    }

    #[test]
    fn separated_scores_give_one(n_pos in 1usize..30, n_neg in 1usize..30, (a, b) in range()) {
        let pos: Vec<f64> = (0..n_pos).map(|i| 10.0 + i as f64).collect();
        let neg: Vec<f64> = (0..n_neg).map(|i| -(i as f64)).collect();
        let sa = ScoreAssignment::new(pos, neg).unwrap();
        prop_assert!((empirical_pauc(&sa, PaucRange::new(a, b).unwrap()) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn roc_is_a_monotone_staircase((pos, neg) in with_ties()) {
        let roc = roc_curve(&ScoreAssignment::new(pos, neg).unwrap());
        let pts = &roc.points;
        prop_assert_eq!((pts[0].fpr, pts[0].tpr), (0.0, 0.0));
        let last = pts[pts.len() - 1];
        prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        for w in pts.windows(2) {
            prop_assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
            prop_assert!(w[1].fpr == w[0].fpr || w[1].tpr == w[0].tpr);
        }
    }

    #[test]
    fn tpr_readout_is_monotone((pos, neg) in with_ties(), u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let roc = roc_curve(&ScoreAssignment::new(pos, neg).unwrap());
        let (lo, hi) = (u.min(v), u.max(v));
        prop_assert!(tpr_at_fpr(&roc, lo) <= tpr_at_fpr(&roc, hi));
    }
}

#[test]
fn worked_example() {
    let sa = ScoreAssignment::new(vec![0.9, 0.4], vec![0.8, 0.5, 0.3, 0.1]).unwrap();
    assert_eq!(empirical_pauc(&sa, PaucRange::new(0.0, 0.5).unwrap()), 0.5);
    assert_eq!(empirical_pauc(&sa, PaucRange::new(0.0, 0.3).unwrap()), 0.5);
    assert_eq!(empirical_auc(&sa), 0.75);
}

#[test]
fn band_inside_one_cell() {
    // Four negatives: [0.3, 0.45] lies inside the second rank cell.
    let pos = vec![0.6, 0.2];
    let neg = vec![0.8, 0.5, 0.3, 0.1];
    let sa = ScoreAssignment::new(pos.clone(), neg.clone()).unwrap();
    let got = empirical_pauc(&sa, PaucRange::new(0.3, 0.45).unwrap());
    assert!((got - 0.5).abs() < 1e-12);
    assert!((got - cell_oracle(&pos, &neg, 0.3, 0.45)).abs() < 1e-12);
}
