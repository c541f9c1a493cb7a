mod common;

use common::{confusion_f1, pairwise_auc, rng};
use proptest::prelude::*;
use rand::Rng;
use sga_core::eval::{auc, compute_metrics, AggregateMetrics, Metrics, Prediction, Summary};
use sga_core::Sign;

fn random_predictions(r: &mut impl Rng, n: usize, levels: u32) -> (Vec<Prediction>, Vec<Sign>) {
    let mut preds = Vec::with_capacity(n);
    let mut truths = Vec::with_capacity(n);
    for _ in 0..n {
        // coarse score grid so ties are common
        let score = r.random_range(0..=levels) as f64 / levels as f64;
        let label = if r.random_bool(0.5) { Sign::Positive } else { Sign::Negative };
        let truth = if r.random_bool(0.7) { Sign::Positive } else { Sign::Negative };
        preds.push(Prediction { score, label });
        truths.push(truth);
    }
    (preds, truths)
}

#[test]
fn metrics_match_pairwise_and_confusion_oracles() {
    let mut r = rng(21);
    let mut checked_auc = 0;
    for _ in 0..200 {
        let n = r.random_range(1..60);
        let (preds, truths) = random_predictions(&mut r, n, 7);
        let m = compute_metrics(&preds, &truths).unwrap();
        let scores: Vec<f64> = preds.iter().map(|p| p.score).collect();
        assert_eq!(m.auc, pairwise_auc(&scores, &truths));
        checked_auc += usize::from(m.auc.is_some());
        let labels: Vec<Sign> = preds.iter().map(|p| p.label).collect();
        let (f1, acc, macro_) = confusion_f1(&labels, &truths);
        assert_eq!(m.f1_binary, f1);
        assert_eq!(m.f1_micro, acc);
        assert_eq!(m.f1_macro, macro_);
    }
    assert!(checked_auc > 150);
}

#[test]
fn auc_hand_cases() {
    use Sign::{Negative as N, Positive as P};
    assert_eq!(auc(&[0.9, 0.1], &[P, N]), Some(1.0));
    assert_eq!(auc(&[0.1, 0.9], &[P, N]), Some(0.0));
    assert_eq!(auc(&[0.5, 0.5], &[P, N]), Some(0.5));
    // positives 0.8, 0.4; negatives 0.4, 0.2: wins 1 + 1 + 0.5 + 1 of 4
    assert_eq!(auc(&[0.8, 0.4, 0.4, 0.2], &[P, P, N, N]), Some(0.875));
    assert_eq!(auc(&[0.3, 0.7], &[P, P]), None);
}

#[test]
fn hand_confusion_matrix() {
    use Sign::{Negative as N, Positive as P};
    // tp 2, fn 1, fp 1, tn 1
    let preds = [P, P, N, P, N].map(|label| Prediction { score: 0.5, label });
    let m = compute_metrics(&preds, &[P, P, P, N, N]).unwrap();
    assert_eq!(m.f1_binary, 4.0 / 6.0);
    assert_eq!(m.f1_micro, 3.0 / 5.0);
    assert_eq!(m.f1_macro, (4.0 / 6.0 + 2.0 / 4.0) / 2.0);
}

#[test]
fn mismatched_or_empty_inputs_fail() {
    assert!(compute_metrics(&[], &[]).is_err());
    let p = Prediction { score: 0.2, label: Sign::Positive };
    assert!(compute_metrics(&[p], &[Sign::Positive, Sign::Negative]).is_err());
}

#[test]
fn summary_uses_population_std() {
    let s = Summary::of(&[1.0, 3.0]);
    assert_eq!((s.mean, s.std, s.count), (2.0, 1.0, 2));
    let single = Summary::of(&[0.7]);
    assert_eq!(single.std, 0.0);
    let agg = AggregateMetrics::of(&[
        Metrics { auc: Some(0.6), f1_binary: 0.5, f1_micro: 0.5, f1_macro: 0.5 },
        Metrics { auc: None, f1_binary: 0.7, f1_micro: 0.5, f1_macro: 0.5 },
    ]);
    assert_eq!(agg.auc.count, 1);
    assert_eq!(agg.f1_binary.count, 2);
    assert!((agg.f1_binary.mean - 0.6).abs() < 1e-15);
}

fn sign_strategy() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Positive), Just(Sign::Negative)]
}

proptest! {
    #[test]
    fn auc_agrees_with_pairwise_count(
        rows in prop::collection::vec((0u8..10, sign_strategy()), 2..80)
    ) {
        let scores: Vec<f64> = rows.iter().map(|r| r.0 as f64 / 10.0).collect();
        let truths: Vec<Sign> = rows.iter().map(|r| r.1).collect();
        prop_assert_eq!(auc(&scores, &truths), pairwise_auc(&scores, &truths));
    }

    #[test]
    fn auc_is_invariant_to_monotone_rescaling(
        rows in prop::collection::vec((0u8..10, sign_strategy()), 2..60)
    ) {
        let scores: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
        let squashed: Vec<f64> = scores.iter().map(|s| (s / 3.0).tanh()).collect();
        let truths: Vec<Sign> = rows.iter().map(|r| r.1).collect();
        prop_assert_eq!(auc(&scores, &truths), auc(&squashed, &truths));
        if let Some(a) = auc(&scores, &truths) {
            prop_assert!((0.0..=1.0).contains(&a));
            let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
            let b = auc(&negated, &truths).unwrap();
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn f1_scores_stay_in_unit_interval(
        rows in prop::collection::vec((sign_strategy(), sign_strategy()), 1..60)
    ) {
        let preds: Vec<Prediction> = rows.iter().map(|r| Prediction { score: 0.5, label: r.0 }).collect();
        let truths: Vec<Sign> = rows.iter().map(|r| r.1).collect();
        let m = compute_metrics(&preds, &truths).unwrap();
        for v in [m.f1_binary, m.f1_micro, m.f1_macro] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
