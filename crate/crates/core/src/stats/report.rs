use serde::{Deserialize, Serialize};

use super::{auc_ci_delong, cohen_kappa, confusion_at_threshold, roc_curve, zip_cases, ConfusionMatrix, RocPoint};
use crate::error::{Error, Result};

pub const REPORT_FORMAT: &str = "fundus-eval-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportCases {
    pub total: usize,
    pub positive: usize,
    pub negative: usize,
}

/// ROC point as written to JSON. Infinite end-point thresholds become `null`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: Option<f64>,
}

impl From<RocPoint<f64>> for ReportRocPoint {
    fn from(p: RocPoint<f64>) -> Self {
        Self { fpr: p.fpr, tpr: p.tpr, threshold: p.threshold.is_finite().then_some(p.threshold) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScorerSummary {
    pub name: String,
    pub auc: f64,
    pub auc_se: f64,
    pub auc_ci: [f64; 2],
    pub accuracy: f64,
    /// Exact accuracy as `correct/total`.
    pub accuracy_fraction: String,
    pub sensitivity: f64,
    pub specificity: f64,
    pub confusion: ConfusionMatrix,
    pub roc_points: Vec<ReportRocPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaEntry {
    pub a: String,
    pub b: String,
    pub kappa: f64,
    pub se0: f64,
    pub z: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub format: String,
    pub version: u32,
    pub threshold: f64,
    pub ci_level: f64,
    pub cases: ReportCases,
    pub model: ScorerSummary,
    pub raters: Vec<ScorerSummary>,
    pub kappa: Vec<KappaEntry>,
}

impl EvalReport {
    pub fn roc_csv_rows(&self) -> Vec<(String, ReportRocPoint)> {
        std::iter::once(&self.model)
            .chain(&self.raters)
            .flat_map(|s| s.roc_points.iter().map(move |p| (s.name.clone(), *p)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RaterLabels {
    pub name: String,
    pub labels: Vec<u8>,
}

fn summarize(name: &str, scores: &[f64], truth: &[u8], threshold: f64, level: f64) -> Result<ScorerSummary> {
    let cases = zip_cases(scores, truth)?;
    let ci = auc_ci_delong(&cases, level)?;
    let confusion = confusion_at_threshold(&cases, threshold)?;
    let acc = confusion.accuracy().ok_or(Error::EmptyInput)?;
    let ratio = |r: Option<num_rational::Ratio<u64>>| r.map_or(f64::NAN, |r| *r.numer() as f64 / *r.denom() as f64);
    Ok(ScorerSummary {
        name: name.to_string(),
        auc: ci.auc,
        auc_se: ci.se,
        auc_ci: [ci.lo, ci.hi],
        accuracy: ratio(Some(acc)),
        accuracy_fraction: format!("{}/{}", acc.numer(), acc.denom()),
        sensitivity: ratio(confusion.sensitivity()),
        specificity: ratio(confusion.specificity()),
        confusion,
        roc_points: roc_curve(&cases)?.points.into_iter().map(Into::into).collect(),
    })
}

/// Assembles AUC with DeLong interval, ROC points and confusion matrix for
/// the model and every rater (raters scored as binary 0/1), and Cohen's
/// Kappa between every pair of truth, thresholded model and raters.
pub fn evaluation_report(
    model_scores: &[f64],
    truth: &[u8],
    raters: &[RaterLabels],
    threshold: f64,
    level: f64,
) -> Result<EvalReport> {
    if model_scores.len() != truth.len() {
        return Err(Error::ShapeMismatch(format!("{} scores for {} cases", model_scores.len(), truth.len())));
    }
    for r in raters {
        if r.labels.len() != truth.len() {
            return Err(Error::ShapeMismatch(format!(
                "rater {} has {} labels for {} cases",
                r.name,
                r.labels.len(),
                truth.len()
            )));
        }
    }
    let positive = truth.iter().filter(|&&l| l == 1).count();
    let model = summarize("model", model_scores, truth, threshold, level)?;
    let rater_summaries = raters
        .iter()
        .map(|r| {
            let scores: Vec<f64> = r.labels.iter().map(|&l| l as f64).collect();
            summarize(&r.name, &scores, truth, threshold, level)
        })
        .collect::<Result<Vec<_>>>()?;

    let model_labels: Vec<u8> = model_scores.iter().map(|&s| (s >= threshold) as u8).collect();
    let mut labelings: Vec<(&str, &[u8])> = vec![("truth", truth), ("model", &model_labels)];
    labelings.extend(raters.iter().map(|r| (r.name.as_str(), r.labels.as_slice())));
    let mut kappa = Vec::new();
    for i in 0..labelings.len() {
        for j in i + 1..labelings.len() {
            let k = cohen_kappa::<f64>(labelings[i].1, labelings[j].1)?;
            kappa.push(KappaEntry {
                a: labelings[i].0.to_string(),
                b: labelings[j].0.to_string(),
                kappa: k.kappa,
                se0: k.se0,
                z: k.z,
                p_value: k.p_value,
            });
        }
    }
    Ok(EvalReport {
        format: REPORT_FORMAT.to_string(),
        version: REPORT_VERSION,
        threshold,
        ci_level: level,
        cases: ReportCases { total: truth.len(), positive, negative: truth.len() - positive },
        model,
        raters: rater_summaries,
        kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth() -> Vec<u8> {
        vec![1, 1, 1, 0, 0, 0, 1, 0]
    }

    #[test]
    fn perfect_model() {
        let t = truth();
        let scores: Vec<f64> = t.iter().map(|&l| l as f64).collect();
        let r = evaluation_report(&scores, &t, &[], 0.5, 0.95).unwrap();
        assert_eq!(r.model.auc, 1.0);
        assert_eq!(r.model.accuracy, 1.0);
        assert!(r.raters.is_empty());
        assert_eq!(r.kappa.len(), 1);
        assert_eq!((r.kappa[0].a.as_str(), r.kappa[0].b.as_str(), r.kappa[0].kappa), ("truth", "model", 1.0));
    }

    #[test]
    fn json_has_fixed_keys_and_round_trips() {
        let t = truth();
        let scores = [0.9, 0.6, 0.4, 0.3, 0.55, 0.1, 0.8, 0.2];
        let rater = RaterLabels { name: "rater1".into(), labels: vec![1, 0, 1, 0, 0, 0, 1, 1] };
        let r = evaluation_report(&scores, &t, &[rater], 0.5, 0.95).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        for key in ["auc", "auc_ci", "accuracy", "confusion", "roc_points"] {
            assert!(json["model"].get(key).is_some(), "missing {key}");
            assert!(json["raters"][0].get(key).is_some(), "missing rater {key}");
        }
        assert!(json["kappa"].is_array());
        assert_eq!(json["model"]["roc_points"][0]["threshold"], serde_json::Value::Null);
        assert_eq!(r.kappa.len(), 3);
        let back: EvalReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn mismatched_lengths() {
        assert!(evaluation_report(&[0.5], &truth(), &[], 0.5, 0.95).is_err());
    }
}
