use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::LabeledImage;
use crate::error::{Error, Result};
use crate::imaging::read_image;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
    #[default]
    #[serde(rename = "")]
    Unassigned,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
            Split::Unassigned => "",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One manifest row. `path` is relative to the manifest's directory unless
/// absolute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub path: PathBuf,
    pub label: u8,
    pub split: Split,
}

#[derive(Deserialize)]
struct RawRow {
    path: String,
    label: String,
    #[serde(default)]
    split: String,
}

/// Reads a `path,label,split` manifest. Errors name the offending line.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<Sample>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(file);
    let bad = |line: usize, message: String| Error::Manifest { path: path.to_path_buf(), line, message };

    let headers = reader.headers().map_err(|e| bad(1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["path", "label", "split"] {
        return Err(bad(1, "header must be `path,label,split`".into()));
    }

    let mut samples = Vec::new();
    let mut seen = HashSet::new();
    for rec in reader.deserialize::<RawRow>() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                return Err(bad(line, e.to_string()));
            }
        };
        let line = samples.len() + 2;
        if rec.path.is_empty() {
            return Err(bad(line, "empty path".into()));
        }
        let label = match rec.label.trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(bad(line, format!("label `{other}` is not 0 or 1"))),
        };
        let split = match rec.split.trim() {
            "train" => Split::Train,
            "val" => Split::Val,
            "test" => Split::Test,
            "" => Split::Unassigned,
            other => return Err(bad(line, format!("unknown split `{other}`"))),
        };
        if !seen.insert(rec.path.clone()) {
            return Err(bad(line, format!("duplicate path `{}`", rec.path)));
        }
        samples.push(Sample { path: PathBuf::from(rec.path), label, split });
    }
    Ok(samples)
}

pub fn write_manifest(path: impl AsRef<Path>, samples: &[Sample]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["path", "label", "split"])?;
    for s in samples {
        let p = s.path.to_string_lossy();
        w.write_record([p.as_ref(), if s.label == 1 { "1" } else { "0" }, s.split.as_str()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Resolves a manifest entry against the directory containing the manifest.
pub fn resolve_path(manifest: &Path, entry: &Path) -> PathBuf {
    if entry.is_absolute() {
        entry.to_path_buf()
    } else {
        manifest.parent().unwrap_or(Path::new("")).join(entry)
    }
}

/// Decodes the images of the given samples in parallel, preserving order.
pub fn load_labeled(manifest: &Path, samples: &[Sample]) -> Result<Vec<LabeledImage>> {
    samples
        .par_iter()
        .map(|s| Ok(LabeledImage { image: read_image(resolve_path(manifest, &s.path))?, label: s.label }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("m.csv");
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn three_rows_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "path,label,split\na.png,0,train\nb.png,1,\nc.png,1,test\n");
        let s = load_manifest(&p).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0], Sample { path: "a.png".into(), label: 0, split: Split::Train });
        assert_eq!(s[1].split, Split::Unassigned);
        assert_eq!(s[2].path, PathBuf::from("c.png"));
    }

    #[test]
    fn bad_label_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "path,label,split\na.png,0,\nb.png,2,\n");
        match load_manifest(&p) {
            Err(Error::Manifest { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_only_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "path,label,split\n");
        assert!(load_manifest(&p).unwrap().is_empty());
    }

    #[test]
    fn duplicates_and_bad_splits_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "path,label,split\na.png,0,\na.png,1,\n");
        assert!(matches!(load_manifest(&p), Err(Error::Manifest { line: 3, .. })));
        let p = write(dir.path(), "path,label,split\na.png,0,holdout\n");
        assert!(matches!(load_manifest(&p), Err(Error::Manifest { line: 2, .. })));
        let p = write(dir.path(), "file,label\na.png,0\n");
        assert!(matches!(load_manifest(&p), Err(Error::Manifest { line: 1, .. })));
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let samples = vec![
            Sample { path: "x/a.png".into(), label: 1, split: Split::Val },
            Sample { path: "b.png".into(), label: 0, split: Split::Unassigned },
        ];
        let p = dir.path().join("out.csv");
        write_manifest(&p, &samples).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "path,label,split\nx/a.png,1,val\nb.png,0,\n");
        assert_eq!(load_manifest(&p).unwrap(), samples);
    }

    #[test]
    fn paths_resolve_relative_to_manifest() {
        assert_eq!(resolve_path(Path::new("data/m.csv"), Path::new("a.png")), PathBuf::from("data/a.png"));
        assert_eq!(resolve_path(Path::new("m.csv"), Path::new("a.png")), PathBuf::from("a.png"));
    }
}
