use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{sort_scalars, split_scores, ScoredCase};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One operating point. `threshold` is `+inf` for the origin and `-inf` for
/// the terminal point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint<T> {
    pub fpr: T,
    pub tpr: T,
    pub threshold: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve<T> {
    pub points: Vec<RocPoint<T>>,
}

/// Empirical ROC curve: one point per distinct score, with a case counted
/// positive when `score >= threshold`.
pub fn roc_curve<T: Scalar>(cases: &[ScoredCase<T>]) -> Result<RocCurve<T>> {
    let (pos, neg) = split_scores(cases)?;
    let (m, n) = (T::from_usize(pos.len()).unwrap(), T::from_usize(neg.len()).unwrap());
    let mut sorted: Vec<(T, u8)> = cases.iter().map(|c| (c.score, c.label)).collect();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite scores"));

    let mut points = vec![RocPoint { fpr: T::zero(), tpr: T::zero(), threshold: T::infinity() }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == t {
            if sorted[i].1 == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: T::from_usize(fp).unwrap() / n,
            tpr: T::from_usize(tp).unwrap() / m,
            threshold: t,
        });
    }
    points.push(RocPoint { fpr: T::one(), tpr: T::one(), threshold: T::neg_infinity() });
    Ok(RocCurve { points })
}

pub fn trapezoid_area<T: Scalar>(curve: &RocCurve<T>) -> T {
    let half = T::lit(0.5);
    curve
        .points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) * half)
        .sum()
}

/// Twice the Mann-Whitney U statistic (so ties stay integral), with the
/// positive and negative counts.
pub fn mann_whitney_twice_u<T: Scalar>(cases: &[ScoredCase<T>]) -> Result<(u64, u64, u64)> {
    let (pos, mut neg) = split_scores(cases)?;
    sort_scalars(&mut neg);
    let twice_u = pos
        .iter()
        .map(|&s| {
            let below = neg.partition_point(|&x| x < s) as u64;
            let not_above = neg.partition_point(|&x| x <= s) as u64;
            2 * below + (not_above - below)
        })
        .sum();
    Ok((twice_u, pos.len() as u64, neg.len() as u64))
}

/// Mann-Whitney AUC: the probability that a positive outscores a negative,
/// ties counting one half.
pub fn auc<T: Scalar>(cases: &[ScoredCase<T>]) -> Result<T> {
    let (twice_u, m, n) = mann_whitney_twice_u(cases)?;
    Ok(T::from_u64(twice_u).unwrap() / T::from_u64(2 * m * n).unwrap())
}

/// O(m n) pair count. Kept public as a reference for the sorted estimator.
pub fn auc_brute_force<T: Scalar>(cases: &[ScoredCase<T>]) -> Result<T> {
    let (pos, neg) = split_scores(cases)?;
    let mut twice_u = 0u64;
    for &p in &pos {
        for &q in &neg {
            twice_u += if p > q {
                2
            } else if p == q {
                1
            } else {
                0
            };
        }
    }
    Ok(T::from_u64(twice_u).unwrap() / T::from_u64(2 * pos.len() as u64 * neg.len() as u64).unwrap())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AucCi<T> {
    pub auc: T,
    pub variance: T,
    pub se: T,
    pub lo: T,
    pub hi: T,
    pub level: T,
}

fn two_sided_z(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence level {level} outside (0, 1)")));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(0.5 + level / 2.0))
}

/// AUC with the DeLong variance estimate and a normal-approximation
/// interval clamped to `[0, 1]`.
pub fn auc_ci_delong<T: Scalar>(cases: &[ScoredCase<T>], level: f64) -> Result<AucCi<T>> {
    let (mut pos, mut neg) = split_scores(cases)?;
    if pos.len() < 2 || neg.len() < 2 {
        return Err(Error::VarianceUndefined);
    }
    sort_scalars(&mut pos);
    sort_scalars(&mut neg);
    let (m, n) = (pos.len(), neg.len());
    let half = T::lit(0.5);
    let placement = |s: T, others: &[T], count_below: bool| -> T {
        let lo = others.partition_point(|&x| x < s);
        let hi = others.partition_point(|&x| x <= s);
        let strict = if count_below { lo } else { others.len() - hi };
        (T::from_usize(strict).unwrap() + half * T::from_usize(hi - lo).unwrap()) / T::from_usize(others.len()).unwrap()
    };
    let v10: Vec<T> = pos.iter().map(|&s| placement(s, &neg, true)).collect();
    let v01: Vec<T> = neg.iter().map(|&s| placement(s, &pos, false)).collect();
    let auc = auc(cases)?;
    let sample_var = |v: &[T]| -> T {
        v.iter().map(|&x| (x - auc) * (x - auc)).sum::<T>() / T::from_usize(v.len() - 1).unwrap()
    };
    let variance = sample_var(&v10) / T::from_usize(m).unwrap() + sample_var(&v01) / T::from_usize(n).unwrap();
    let se = variance.sqrt();
    let z = T::lit(two_sided_z(level)?);
    Ok(AucCi {
        auc,
        variance,
        se,
        lo: (auc - z * se).max(T::zero()),
        hi: (auc + z * se).min(T::one()),
        level: T::lit(level),
    })
}

/// Percentile bootstrap interval, resampling positives and negatives
/// separately. Replicate `r` draws from its own stream of `seed`, so the
/// result does not depend on thread scheduling.
pub fn auc_ci_bootstrap<T: Scalar>(cases: &[ScoredCase<T>], level: f64, replicates: usize, seed: u64) -> Result<(T, T)> {
    two_sided_z(level)?;
    if replicates == 0 {
        return Err(Error::InvalidParameter("zero bootstrap replicates".into()));
    }
    let (pos, neg) = split_scores(cases)?;
    let mut stats: Vec<T> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r);
            let mut sample = Vec::with_capacity(pos.len() + neg.len());
            sample.extend((0..pos.len()).map(|_| ScoredCase::new(pos[rng.random_range(0..pos.len())], 1)));
            sample.extend((0..neg.len()).map(|_| ScoredCase::new(neg[rng.random_range(0..neg.len())], 0)));
            auc(&sample).expect("both classes present")
        })
        .collect();
    sort_scalars(&mut stats);
    let tail = (1.0 - level) / 2.0;
    let quantile = |q: f64| {
        let idx = (q * (replicates - 1) as f64).round() as usize;
        stats[idx.min(replicates - 1)]
    };
    Ok((quantile(tail), quantile(1.0 - tail)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cases(pos: &[f64], neg: &[f64]) -> Vec<ScoredCase<f64>> {
        pos.iter()
            .map(|&s| ScoredCase::new(s, 1))
            .chain(neg.iter().map(|&s| ScoredCase::new(s, 0)))
            .collect()
    }

    #[test]
    fn hand_enumerated_staircase() {
        let c = cases(&[0.9, 0.8, 0.7], &[0.75, 0.6]);
        let roc = roc_curve(&c).unwrap();
        let got: Vec<(f64, f64)> = roc.points.iter().map(|p| (p.fpr, p.tpr)).collect();
        let want = vec![
            (0.0, 0.0),
            (0.0, 1.0 / 3.0),
            (0.0, 2.0 / 3.0),
            (0.5, 2.0 / 3.0),
            (0.5, 1.0),
            (1.0, 1.0),
            (1.0, 1.0),
        ];
        assert_eq!(got, want);
        assert_eq!(roc.points[0].threshold, f64::INFINITY);
        assert_eq!(roc.points[6].threshold, f64::NEG_INFINITY);
        assert_eq!(auc(&c).unwrap(), 5.0 / 6.0);
    }

    #[test]
    fn separated_scores_reach_top_left() {
        let c = cases(&[0.9, 0.8], &[0.2, 0.1, 0.3]);
        let roc = roc_curve(&c).unwrap();
        assert!(roc.points.iter().any(|p| p.fpr == 0.0 && p.tpr == 1.0));
        assert_eq!(auc(&c).unwrap(), 1.0);
    }

    #[test]
    fn all_ties() {
        let c = cases(&[0.4, 0.4], &[0.4, 0.4, 0.4]);
        let roc = roc_curve(&c).unwrap();
        let got: Vec<(f64, f64)> = roc.points.iter().map(|p| (p.fpr, p.tpr)).collect();
        assert_eq!(got, vec![(0.0, 0.0), (1.0, 1.0), (1.0, 1.0)]);
        assert_eq!(auc(&c).unwrap(), 0.5);
    }

    #[test]
    fn single_class_rejected() {
        let c = cases(&[0.4, 0.5], &[]);
        assert!(matches!(roc_curve(&c), Err(Error::DegenerateLabels)));
        assert!(matches!(auc(&c), Err(Error::DegenerateLabels)));
    }

    #[test]
    fn delong_hand_case() {
        let ci = auc_ci_delong(&cases(&[0.9, 0.8], &[0.1, 0.85]), 0.95).unwrap();
        assert_eq!(ci.auc, 0.75);
        assert_eq!(ci.variance, 0.125);
        assert!((ci.se - 0.353_553_390_593_273_8).abs() < 1e-12);
        assert!(ci.lo >= 0.0 && ci.hi == 1.0);
    }

    #[test]
    fn delong_separated_has_zero_width() {
        let c = cases(&[0.9, 0.8, 0.95, 0.7], &[0.1, 0.2, 0.3]);
        let ci = auc_ci_delong(&c, 0.95).unwrap();
        assert_eq!((ci.auc, ci.se, ci.lo, ci.hi), (1.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn delong_needs_two_per_class() {
        assert!(matches!(auc_ci_delong(&cases(&[0.9], &[0.1, 0.2]), 0.95), Err(Error::VarianceUndefined)));
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let c = cases(&[0.9, 0.7, 0.6, 0.55], &[0.5, 0.65, 0.2, 0.1]);
        let a = auc_ci_bootstrap(&c, 0.95, 500, 3).unwrap();
        let b = auc_ci_bootstrap(&c, 0.95, 500, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.0 <= a.1);
    }
}
