//! Nonparametric ROC analysis, Mann-Whitney AUC with DeLong and bootstrap
//! confidence intervals, confusion matrices and Cohen's Kappa.

mod confusion;
mod io;
mod kappa;
mod report;
mod roc;

pub use confusion::{confusion_at_threshold, ConfusionMatrix};
pub use io::{read_rater_csv, read_scores_csv, write_roc_csv, write_scores_csv, RaterRow, ScoreRow};
pub use kappa::{cohen_kappa, cohen_kappa_from_table, KappaResult};
pub use report::{evaluation_report, EvalReport, KappaEntry, RaterLabels, ReportCases, ScorerSummary};
pub use roc::{
    auc, auc_brute_force, auc_ci_bootstrap, auc_ci_delong, mann_whitney_twice_u, roc_curve, trapezoid_area, AucCi,
    RocCurve, RocPoint,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredCase<T> {
    pub score: T,
    pub label: u8,
}

impl<T> ScoredCase<T> {
    pub const fn new(score: T, label: u8) -> Self {
        Self { score, label }
    }
}

/// Builds cases from parallel score and label slices.
pub fn zip_cases<T: Scalar>(scores: &[T], labels: &[u8]) -> Result<Vec<ScoredCase<T>>> {
    if scores.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!("{} scores but {} labels", scores.len(), labels.len())));
    }
    scores.iter().zip(labels).map(|(&s, &l)| checked_case(s, l)).collect()
}

fn checked_case<T: Scalar>(score: T, label: u8) -> Result<ScoredCase<T>> {
    if label > 1 {
        return Err(Error::InvalidLabel(label as i64));
    }
    if !score.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite score {score}")));
    }
    Ok(ScoredCase { score, label })
}

fn split_scores<T: Scalar>(cases: &[ScoredCase<T>]) -> Result<(Vec<T>, Vec<T>)> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for c in cases {
        checked_case(c.score, c.label)?;
        if c.label == 1 {
            pos.push(c.score);
        } else {
            neg.push(c.score);
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::DegenerateLabels);
    }
    Ok((pos, neg))
}

fn sort_scalars<T: Scalar>(v: &mut [T]) {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
}
