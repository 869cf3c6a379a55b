use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::ScoredCase;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn correct(&self) -> u64 {
        self.tp + self.tn
    }

    /// Exact accuracy; `None` for an empty matrix.
    pub fn accuracy(&self) -> Option<Ratio<u64>> {
        (self.total() > 0).then(|| Ratio::new_raw(self.correct(), self.total()))
    }

    pub fn sensitivity(&self) -> Option<Ratio<u64>> {
        (self.tp + self.fn_ > 0).then(|| Ratio::new_raw(self.tp, self.tp + self.fn_))
    }

    pub fn specificity(&self) -> Option<Ratio<u64>> {
        (self.tn + self.fp > 0).then(|| Ratio::new_raw(self.tn, self.tn + self.fp))
    }
}

/// Tallies predictions `score >= threshold` against the labels.
pub fn confusion_at_threshold<T: Scalar>(cases: &[ScoredCase<T>], threshold: T) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::default();
    for c in cases {
        let predicted = c.score >= threshold;
        match (c.label, predicted) {
            (1, true) => cm.tp += 1,
            (1, false) => cm.fn_ += 1,
            (0, true) => cm.fp += 1,
            (0, false) => cm.tn += 1,
            (l, _) => return Err(Error::InvalidLabel(l as i64)),
        }
    }
    Ok(cm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_cases(tp: usize, fn_: usize, tn: usize, fp: usize) -> Vec<ScoredCase<f64>> {
        let mut v = Vec::new();
        v.extend(std::iter::repeat_n(ScoredCase::new(1.0, 1), tp));
        v.extend(std::iter::repeat_n(ScoredCase::new(0.0, 1), fn_));
        v.extend(std::iter::repeat_n(ScoredCase::new(0.0, 0), tn));
        v.extend(std::iter::repeat_n(ScoredCase::new(1.0, 0), fp));
        v
    }

    #[test]
    fn computer_row() {
        let cm = confusion_at_threshold(&binary_cases(111, 22, 104, 14), 0.5).unwrap();
        assert_eq!(cm, ConfusionMatrix { tp: 111, fp: 14, tn: 104, fn_: 22 });
        assert_eq!(cm.accuracy().unwrap(), Ratio::new(215, 251));
    }

    #[test]
    fn rater_row() {
        let cm = confusion_at_threshold(&binary_cases(96, 37, 113, 5), 0.5).unwrap();
        assert_eq!(cm.accuracy().unwrap(), Ratio::new(209, 251));
        assert_eq!(cm.sensitivity().unwrap(), Ratio::new(96, 133));
        assert_eq!(cm.specificity().unwrap(), Ratio::new(113, 118));
    }

    #[test]
    fn zero_threshold_predicts_all_positive() {
        let cases = vec![ScoredCase::new(0.0, 0), ScoredCase::new(0.3, 0), ScoredCase::new(0.1, 1)];
        let cm = confusion_at_threshold(&cases, 0.0).unwrap();
        assert_eq!((cm.fp, cm.tn, cm.tp, cm.fn_), (2, 0, 1, 0));
    }

    #[test]
    fn boundary_is_inclusive() {
        let cm = confusion_at_threshold(&[ScoredCase::new(0.5, 1)], 0.5).unwrap();
        assert_eq!(cm.tp, 1);
    }

    #[test]
    fn bad_label() {
        assert!(confusion_at_threshold(&[ScoredCase::new(0.5, 2)], 0.5).is_err());
    }
}
