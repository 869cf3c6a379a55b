use std::fs;
use std::path::Path;

use fundus_core::dataset::{AugmentParams, SplitSpec};
use fundus_core::fov::FovConfig;
use fundus_core::model::{ModelSpec, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Probability at or above which the model calls a case positive.
    pub threshold: f64,
    pub ci_level: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { threshold: 0.5, ci_level: 0.95 }
    }
}

/// Every tunable of the pipeline in one JSON document. Missing fields take
/// their defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Seed used by `synth`.
    pub seed: u64,
    /// Output side length for `preprocess`.
    pub preprocess_size: Option<usize>,
    pub fov: FovConfig,
    pub augment: AugmentParams,
    pub model: ModelSpec,
    pub train: TrainConfig,
    pub split: SplitSpec,
    pub eval: EvalConfig,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model.validate().map_err(CliError::usage)?;
        self.train.validate().map_err(CliError::usage)?;
        self.split.validate().map_err(CliError::usage)?;
        self.augment.validate().map_err(CliError::usage)?;
        let f = &self.fov;
        if !(0.0..0.5).contains(&f.trim_fraction) || !(0.0..1.0).contains(&f.min_area_fraction) {
            return Err(CliError::usage("fov trim_fraction must lie in [0, 0.5) and min_area_fraction in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.eval.threshold) {
            return Err(CliError::usage("eval threshold must lie in [0, 1]"));
        }
        if !(self.eval.ci_level > 0.0 && self.eval.ci_level < 1.0) {
            return Err(CliError::usage("eval ci_level must lie in (0, 1)"));
        }
        if self.preprocess_size == Some(0) {
            return Err(CliError::usage("preprocess_size must be positive"));
        }
        Ok(())
    }

    /// A `--seed` flag replaces every seed in the configuration.
    pub fn apply_seed(&mut self, seed: Option<u64>) {
        if let Some(s) = seed {
            self.seed = s;
            self.split.seed = s;
            self.train.seed = s;
            self.augment.seed = s;
        }
    }
}
