use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::report::ReportRocPoint;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub case_id: String,
    pub score: f64,
    pub label: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaterRow {
    pub case_id: String,
    pub label: u8,
}

fn read_rows<R: for<'de> Deserialize<'de>>(path: &Path, check: impl Fn(&R) -> Option<String>) -> Result<Vec<R>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<R>().enumerate() {
        let line = i + 2;
        let row = rec.map_err(|e| Error::Manifest { path: path.to_path_buf(), line, message: e.to_string() })?;
        if let Some(message) = check(&row) {
            return Err(Error::Manifest { path: path.to_path_buf(), line, message });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Reads `case_id,score,label`.
pub fn read_scores_csv(path: impl AsRef<Path>) -> Result<Vec<ScoreRow>> {
    read_rows(path.as_ref(), |r: &ScoreRow| {
        if r.label > 1 {
            Some(format!("label {} is not 0 or 1", r.label))
        } else if !r.score.is_finite() {
            Some("score is not finite".into())
        } else {
            None
        }
    })
}

/// Reads `case_id,label`.
pub fn read_rater_csv(path: impl AsRef<Path>) -> Result<Vec<RaterRow>> {
    read_rows(path.as_ref(), |r: &RaterRow| (r.label > 1).then(|| format!("label {} is not 0 or 1", r.label)))
}

pub fn write_scores_csv(path: impl AsRef<Path>, rows: &[ScoreRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `scorer,fpr,tpr,threshold`; end-point thresholds are written as
/// `inf` and `-inf`.
pub fn write_roc_csv(path: impl AsRef<Path>, rows: &[(String, ReportRocPoint)]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["scorer", "fpr", "tpr", "threshold"])?;
    for (i, (name, p)) in rows.iter().enumerate() {
        let first = i == 0 || rows[i - 1].0 != *name;
        let threshold = match p.threshold {
            Some(t) => t.to_string(),
            None if first => "inf".to_string(),
            None => "-inf".to_string(),
        };
        w.write_record([name.clone(), p.fpr.to_string(), p.tpr.to_string(), threshold])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scores_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        let rows = vec![
            ScoreRow { case_id: "a.png".into(), score: 0.25, label: 1 },
            ScoreRow { case_id: "b.png".into(), score: 0.75, label: 0 },
        ];
        write_scores_csv(&path, &rows).unwrap();
        assert!(std::fs::read_to_string(&path).unwrap().starts_with("case_id,score,label\n"));
        assert_eq!(read_scores_csv(&path).unwrap(), rows);
    }

    #[test]
    fn rater_label_validated_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        std::fs::write(&path, "case_id,label\na,1\nb,3\n").unwrap();
        match read_rater_csv(&path) {
            Err(Error::Manifest { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
