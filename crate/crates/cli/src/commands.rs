use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use fundus_core::dataset::{
    generate_synthetic_with, load_labeled, load_manifest, resolve_path, split_dataset, write_manifest, Sample, Split,
    SplitSpec, SynthOptions,
};
use fundus_core::imaging::{read_image, write_png};
use fundus_core::model::{load_model, predict, save_model, train as train_model, TrainConfig};
use fundus_core::pipeline::{preprocess as preprocess_image, score_images, PreprocessConfig};
use fundus_core::stats::{evaluation_report, read_rater_csv, read_scores_csv, write_roc_csv, write_scores_csv, RaterLabels, ScoreRow};
use rayon::prelude::*;
use serde_json::json;

use crate::config::PipelineConfig;
use crate::{CliError, EvalArgs, InferArgs, PreprocessArgs, SplitArgs, SynthArgs, TrainArgs};

fn print_json(v: &serde_json::Value) {
    println!("{v}");
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn synth(cfg: &PipelineConfig, a: &SynthArgs) -> Result<(), CliError> {
    let opts = SynthOptions { size: a.size, paired: a.paired };
    let manifest = generate_synthetic_with(a.n, cfg.seed, &a.out, &opts)?;
    eprintln!("wrote {} images", 2 * a.n);
    println!("{}", manifest.display());
    Ok(())
}

fn processed_name(entry: &Path) -> PathBuf {
    entry.with_extension("png")
}

pub fn preprocess(cfg: &PipelineConfig, a: &PreprocessArgs) -> Result<(), CliError> {
    let size = a.size.or(cfg.preprocess_size).unwrap_or(299);
    if size == 0 {
        return Err(CliError::usage("--size must be positive"));
    }
    let pcfg = PreprocessConfig { fov: cfg.fov, size };
    let samples = load_manifest(&a.manifest)?;
    fs::create_dir_all(&a.out).map_err(|e| CliError::data(format!("{}: {e}", a.out.display())))?;

    let results: Vec<Result<Sample, String>> = samples
        .par_iter()
        .map(|s| {
            let src = resolve_path(&a.manifest, &s.path);
            let run = || -> fundus_core::Result<Sample> {
                let img = read_image(&src)?;
                let out = preprocess_image(&img, &pcfg)?;
                let name = processed_name(&s.path);
                let dest = a.out.join(&name);
                if let Some(parent) = dest.parent() {
                    fs::create_dir_all(parent).map_err(|e| fundus_core::Error::Io { path: parent.into(), source: e })?;
                }
                write_png(&out.image, &dest)?;
                Ok(Sample { path: name, ..s.clone() })
            };
            run().map_err(|e| format!("{}: {e}", src.display()))
        })
        .collect();

    let mut kept = Vec::new();
    let mut skipped = 0usize;
    for r in results {
        match r {
            Ok(s) => kept.push(s),
            Err(msg) => {
                skipped += 1;
                eprintln!("skipped {msg}");
            }
        }
    }
    eprintln!("processed {}, skipped {skipped}", kept.len());
    if kept.is_empty() && skipped > 0 {
        return Err(CliError::data("every image failed preprocessing"));
    }
    let manifest = a.out.join("manifest.csv");
    write_manifest(&manifest, &kept)?;
    println!("{}", manifest.display());
    Ok(())
}

fn split_counts_json(samples: &[Sample]) -> serde_json::Value {
    let count = |split: Split, label: u8| samples.iter().filter(|s| s.split == split && s.label == label).count();
    let mut obj = serde_json::Map::new();
    for split in [Split::Train, Split::Val, Split::Test] {
        obj.insert(split.as_str().into(), json!({ "negative": count(split, 0), "positive": count(split, 1) }));
    }
    serde_json::Value::Object(obj)
}

pub fn split(cfg: &PipelineConfig, a: &SplitArgs) -> Result<(), CliError> {
    let mut spec = SplitSpec { stratified: cfg.split.stratified && !a.no_stratify, ..cfg.split };
    if let Some(r) = &a.ratios {
        let &[train, val, test] = r.as_slice() else {
            return Err(CliError::usage(format!("--ratios takes three comma-separated values, got {}", r.len())));
        };
        spec.ratios = (train, val, test);
    }
    spec.validate()?;
    let samples = load_manifest(&a.manifest)?;
    let out = if a.respect_existing {
        let open: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].split == Split::Unassigned).collect();
        let mut out = samples.clone();
        if !open.is_empty() {
            let subset: Vec<Sample> = open.iter().map(|&i| samples[i].clone()).collect();
            for (i, s) in open.iter().zip(split_dataset(&subset, &spec)?) {
                out[*i] = s;
            }
        }
        out
    } else {
        split_dataset(&samples, &spec)?
    };
    let dest = a.out.clone().unwrap_or_else(|| a.manifest.clone());
    write_manifest(&dest, &out)?;
    eprintln!("{}", split_counts_json(&out));
    println!("{}", dest.display());
    Ok(())
}

pub fn train(cfg: &PipelineConfig, a: &TrainArgs) -> Result<(), CliError> {
    let tc = TrainConfig {
        max_epochs: a.epochs.unwrap_or(cfg.train.max_epochs),
        patience: a.patience.unwrap_or(cfg.train.patience),
        batch_size: a.batch_size.unwrap_or(cfg.train.batch_size),
        learning_rate: a.learning_rate.unwrap_or(cfg.train.learning_rate),
        ..cfg.train.clone()
    };
    tc.validate()?;
    let samples = load_manifest(&a.manifest)?;
    let pick = |split| samples.iter().filter(|s| s.split == split).cloned().collect::<Vec<_>>();
    let (train_rows, val_rows) = (pick(Split::Train), pick(Split::Val));
    if train_rows.is_empty() {
        return Err(CliError::data("manifest has no train split rows"));
    }
    if val_rows.is_empty() {
        return Err(CliError::data("manifest has no val split rows"));
    }
    let train_set = load_labeled(&a.manifest, &train_rows)?;
    let val_set = load_labeled(&a.manifest, &val_rows)?;
    let augment = (!a.no_augment).then_some(&cfg.augment);

    let outcome = train_model::<f32>(&cfg.model, &train_set, &val_set, &tc, augment, |e| {
        eprintln!(
            "epoch {:>3}  train_loss {:.4}  train_acc {:.3}  val_loss {:.4}  val_acc {:.3}",
            e.epoch, e.train_loss, e.train_acc, e.val_loss, e.val_acc
        )
    })?;
    save_model(&outcome.params, &a.model_out)?;
    let history = a.history.clone().unwrap_or_else(|| a.model_out.with_extension("history.csv"));
    write_text(&history, &outcome.history.to_csv())?;
    print_json(&json!({
        "model": a.model_out,
        "history": history,
        "epochs": outcome.history.epochs.len(),
        "best_epoch": outcome.best_epoch,
        "stopped_early": outcome.stopped_early,
    }));
    Ok(())
}

fn rater_labels(path: &Path, case_ids: &[String]) -> Result<RaterLabels, CliError> {
    let rows = read_rater_csv(path)?;
    let by_id: HashMap<&str, u8> = rows.iter().map(|r| (r.case_id.as_str(), r.label)).collect();
    let labels = case_ids
        .iter()
        .map(|id| by_id.get(id.as_str()).copied().ok_or_else(|| CliError::data(format!("{}: no label for case {id}", path.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    Ok(RaterLabels { name, labels })
}

pub fn eval(cfg: &PipelineConfig, a: &EvalArgs) -> Result<(), CliError> {
    let threshold = a.threshold.unwrap_or(cfg.eval.threshold);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(CliError::usage("--threshold must lie in [0, 1]"));
    }
    let rows: Vec<ScoreRow> = match (&a.model, &a.scores) {
        (Some(model), _) => {
            let manifest = a.manifest.as_ref().ok_or_else(|| CliError::usage("--model requires --manifest"))?;
            let params = load_model(model)?;
            let samples: Vec<Sample> =
                load_manifest(manifest)?.into_iter().filter(|s| a.all_rows || s.split == Split::Test).collect();
            if samples.is_empty() {
                return Err(CliError::data("no rows to evaluate"));
            }
            let images: Vec<_> = load_labeled(manifest, &samples)?.into_iter().map(|l| l.image).collect();
            let scores = score_images(&params, &images)?;
            samples
                .iter()
                .zip(scores)
                .map(|(s, score)| ScoreRow { case_id: s.path.to_string_lossy().into_owned(), score, label: s.label })
                .collect()
        }
        (None, Some(scores)) => read_scores_csv(scores)?,
        (None, None) => return Err(CliError::usage("either --model or --scores is required")),
    };
    if rows.is_empty() {
        return Err(CliError::data("no cases to evaluate"));
    }
    if let Some(out) = &a.scores_out {
        write_scores_csv(out, &rows)?;
    }

    let case_ids: Vec<String> = rows.iter().map(|r| r.case_id.clone()).collect();
    let raters = a.raters.iter().map(|p| rater_labels(p, &case_ids)).collect::<Result<Vec<_>, _>>()?;
    let scores: Vec<f64> = rows.iter().map(|r| r.score).collect();
    let truth: Vec<u8> = rows.iter().map(|r| r.label).collect();
    let report = evaluation_report(&scores, &truth, &raters, threshold, cfg.eval.ci_level)?;

    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError { code: 3, message: e.to_string() })?;
    text.push('\n');
    write_text(&a.report, &text)?;
    let roc = a.roc.clone().unwrap_or_else(|| a.report.with_extension("roc.csv"));
    write_roc_csv(&roc, &report.roc_csv_rows())?;
    print_json(&json!({
        "report": a.report,
        "roc": roc,
        "cases": report.cases.total,
        "auc": report.model.auc,
        "auc_ci": report.model.auc_ci,
        "accuracy": report.model.accuracy,
    }));
    Ok(())
}

pub fn infer(cfg: &PipelineConfig, a: &InferArgs) -> Result<(), CliError> {
    let params = load_model(&a.model)?;
    let pcfg = PreprocessConfig { fov: cfg.fov, size: params.spec.input_size };
    let results: Vec<Result<f64, String>> = a
        .images
        .par_iter()
        .map(|p| {
            read_image(p)
                .and_then(|img| preprocess_image(&img, &pcfg))
                .and_then(|pre| predict(&params, &pre.image))
                .map_err(|e| e.to_string())
        })
        .collect();
    let mut failed = 0usize;
    for (path, r) in a.images.iter().zip(results) {
        match r {
            Ok(p) => println!("{},{p}", path.display()),
            Err(e) => {
                failed += 1;
                eprintln!("failed {}: {e}", path.display());
            }
        }
    }
    if failed > 0 {
        return Err(CliError::data(format!("{failed} of {} images failed", a.images.len())));
    }
    Ok(())
}
