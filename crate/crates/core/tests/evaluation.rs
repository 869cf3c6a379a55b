use fundus_core::stats::{
    auc, auc_brute_force, auc_ci_delong, cohen_kappa, confusion_at_threshold, evaluation_report, roc_curve, trapezoid_area,
    RaterLabels, ScoredCase,
};
use proptest::prelude::*;

fn cases_from(scores: &[u8], labels: &[bool]) -> Vec<ScoredCase<f64>> {
    scores.iter().zip(labels).map(|(&s, &l)| ScoredCase::new(s as f64 / 8.0, l as u8)).collect()
}

proptest! {
    #[test]
    fn auc_equals_pairwise_count_and_roc_area(pairs in prop::collection::vec((0u8..8, any::<bool>()), 2..120)) {
        let (scores, labels): (Vec<u8>, Vec<bool>) = pairs.into_iter().unzip();
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let cases = cases_from(&scores, &labels);
        let a = auc(&cases).unwrap();
        prop_assert_eq!(a, auc_brute_force(&cases).unwrap());
        prop_assert!((trapezoid_area(&roc_curve(&cases).unwrap()) - a).abs() < 1e-12);
    }

    #[test]
    fn flipping_labels_mirrors_auc(pairs in prop::collection::vec((0u8..8, any::<bool>()), 2..80)) {
        let (scores, labels): (Vec<u8>, Vec<bool>) = pairs.into_iter().unzip();
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
        let a = auc(&cases_from(&scores, &labels)).unwrap();
        let b = auc(&cases_from(&scores, &flipped)).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kappa_is_symmetric_and_bounded(pairs in prop::collection::vec((0u8..2, 0u8..2), 4..200)) {
        let (a, b): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        if let (Ok(ab), Ok(ba)) = (cohen_kappa::<f64>(&a, &b), cohen_kappa::<f64>(&b, &a)) {
            prop_assert!((ab.kappa - ba.kappa).abs() < 1e-12);
            prop_assert!(ab.kappa <= 1.0 + 1e-12 && ab.kappa >= -1.0 - 1e-12);
        }
    }
}

#[test]
fn roc_curve_runs_from_origin_to_corner() {
    let cases = cases_from(&[1, 5, 3, 7, 2], &[false, true, false, true, true]);
    let curve = roc_curve(&cases).unwrap();
    let first = curve.points.first().unwrap();
    let last = curve.points.last().unwrap();
    assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
    assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    assert!(curve.points.windows(2).all(|w| w[0].fpr <= w[1].fpr && w[0].tpr <= w[1].tpr));
}

#[test]
fn delong_interval_contains_estimate_and_shrinks_with_data() {
    let small: Vec<_> = (0..20).map(|i| ScoredCase::new(((i * 7) % 20) as f64 + (i % 2) as f64 * 5.0, (i % 2) as u8)).collect();
    let large: Vec<_> = (0..400).map(|i| ScoredCase::new(((i * 7) % 20) as f64 + (i % 2) as f64 * 5.0, (i % 2) as u8)).collect();
    let a = auc_ci_delong(&small, 0.95).unwrap();
    let b = auc_ci_delong(&large, 0.95).unwrap();
    assert!(a.lo <= a.auc && a.auc <= a.hi);
    assert!(b.hi - b.lo < a.hi - a.lo);
}

#[test]
fn report_scores_raters_as_binary_classifiers() {
    let truth = [1u8, 1, 1, 0, 0, 0];
    let scores = [0.9, 0.6, 0.4, 0.55, 0.2, 0.1];
    let rater = RaterLabels { name: "r".into(), labels: vec![1, 0, 1, 0, 0, 1] };
    let report = evaluation_report(&scores, &truth, &[rater], 0.5, 0.95).unwrap();
    let cm = confusion_at_threshold(&scores.iter().zip(truth).map(|(&s, l)| ScoredCase::new(s, l)).collect::<Vec<_>>(), 0.5).unwrap();
    assert_eq!(report.model.confusion, cm);
    assert_eq!(report.model.accuracy_fraction, "4/6");
    assert_eq!(report.raters[0].accuracy_fraction, "4/6");
    // binary scores: AUC is the mean of sensitivity and specificity
    assert!((report.raters[0].auc - (2.0 / 3.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
    assert_eq!(report.kappa.len(), 3);
    assert!(evaluation_report(&scores[..5], &truth, &[], 0.5, 0.95).is_err());
}
