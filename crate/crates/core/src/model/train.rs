use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamState};
use super::network::{forward, gradients, image_to_input, loss_cross_entropy, Mode};
use super::params::Params;
use super::{ModelSpec, TrainConfig, CLASSES};
use crate::dataset::{augment_sample, derive_seed, AugmentParams, LabeledImage};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
}

impl History {
    pub const CSV_HEADER: &'static str = "epoch,train_loss,train_acc,val_loss,val_acc";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for e in &self.epochs {
            let _ = writeln!(out, "{},{},{},{},{}", e.epoch, e.train_loss, e.train_acc, e.val_loss, e.val_acc);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    Continue,
    Stop,
}

/// Patience counter on validation loss. Only a strict decrease counts as
/// an improvement.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    stale: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self { patience, best: f64::INFINITY, best_epoch: 0, stale: 0 }
    }

    pub fn observe(&mut self, epoch: usize, val_loss: f64) -> StopDecision {
        if val_loss < self.best {
            self.best = val_loss;
            self.best_epoch = epoch;
            self.stale = 0;
            return StopDecision::Improved;
        }
        self.stale += 1;
        if self.stale >= self.patience {
            StopDecision::Stop
        } else {
            StopDecision::Continue
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_loss(&self) -> f64 {
        self.best
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    /// Parameters from the epoch with the lowest validation loss.
    pub params: Params<T>,
    pub history: History,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

fn accuracy<T: Scalar>(probs: &[[T; CLASSES]], labels: &[u8]) -> f64 {
    let correct = probs
        .iter()
        .zip(labels)
        .filter(|(p, &l)| (p[1] >= T::lit(0.5)) == (l == 1))
        .count();
    correct as f64 / labels.len() as f64
}

fn check_sizes(spec: &ModelSpec, set: &[LabeledImage], name: &str) -> Result<()> {
    if set.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} set is empty")));
    }
    let s = spec.input_size;
    if let Some(bad) = set.iter().find(|e| e.image.width() != s || e.image.height() != s) {
        return Err(Error::ShapeMismatch(format!(
            "{name} image is {}x{}, model expects {s}x{s}",
            bad.image.width(),
            bad.image.height()
        )));
    }
    Ok(())
}

/// Mini-batch Adam with per-epoch validation and early stopping.
///
/// Each epoch shuffles the training set from its own RNG stream, augments
/// every training image with draw index `epoch * n + i`, and evaluates the
/// validation set without dropout. `on_epoch` is called after each epoch.
pub fn train<T: Scalar>(
    spec: &ModelSpec,
    train_set: &[LabeledImage],
    val_set: &[LabeledImage],
    cfg: &TrainConfig,
    augment: Option<&AugmentParams>,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome<T>> {
    spec.validate()?;
    cfg.validate()?;
    check_sizes(spec, train_set, "training")?;
    check_sizes(spec, val_set, "validation")?;
    if let Some(a) = augment {
        a.validate()?;
    }

    let mut params = Params::<T>::init(spec, derive_seed(cfg.seed, &[0x1]))?;
    let mut adam = AdamState::new(&params);
    let mut best = params.clone();
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut history = History::default();
    let mut stopped_early = false;

    let val_inputs: Vec<Vec<T>> = val_set.iter().map(|e| image_to_input(&e.image)).collect();
    let val_labels: Vec<u8> = val_set.iter().map(|e| e.label).collect();
    let n = train_set.len();
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 1..=cfg.max_epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[0x2]));
        rng.set_stream(epoch as u64);
        order.sort_unstable();
        order.shuffle(&mut rng);

        let (mut loss_sum, mut correct) = (0.0f64, 0.0f64);
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let inputs: Vec<Vec<T>> = batch
                .iter()
                .map(|&i| {
                    let img = &train_set[i].image;
                    match augment {
                        Some(a) => image_to_input(&augment_sample(img, a, ((epoch - 1) * n + i) as u64)),
                        None => image_to_input(img),
                    }
                })
                .collect();
            let labels: Vec<u8> = batch.iter().map(|&i| train_set[i].label).collect();
            let g = gradients(&params, &inputs, &labels, derive_seed(cfg.seed, &[0x3, epoch as u64, b as u64]))?;
            adam_step(&mut params, &g.tensors, &mut adam, cfg)?;
            loss_sum += g.loss.as_f64() * batch.len() as f64;
            correct += accuracy(&g.probs, &labels) * batch.len() as f64;
        }

        let val_probs = forward(&params, &val_inputs, Mode::Eval)?;
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / n as f64,
            train_acc: correct / n as f64,
            val_loss: loss_cross_entropy(&val_probs, &val_labels)?.as_f64(),
            val_acc: accuracy(&val_probs, &val_labels),
        };
        history.epochs.push(record);
        on_epoch(&record);
        match stopper.observe(epoch, record.val_loss) {
            StopDecision::Improved => best = params.clone(),
            StopDecision::Continue => {}
            StopDecision::Stop => {
                stopped_early = epoch < cfg.max_epochs;
                break;
            }
        }
    }
    Ok(TrainOutcome { params: best, history, best_epoch: stopper.best_epoch(), stopped_early })
}
