//! Small convolutional classifier with a two-way softmax head.
//!
//! The backbone is a stack of `3x3 conv (same padding) -> ReLU -> 2x2 max
//! pool` blocks. The head is `dense(hidden) -> ReLU -> dropout -> dense(2)
//! -> softmax`. Gradients are computed analytically; training uses Adam with
//! early stopping on validation loss.

mod adam;
mod io;
mod layers;
mod network;
mod params;
mod train;

pub use adam::{adam_step, AdamState};
pub use io::{load_model, read_model, save_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use layers::softmax;
pub use network::{forward, gradients, image_to_input, loss_cross_entropy, penultimate, predict, Gradients, Mode};
pub use params::{Params, Tensor};
pub use train::{train, EarlyStopping, EpochRecord, History, StopDecision, TrainOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the last feature map is turned into the dense layer's input.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// The whole feature map, channel-major.
    #[default]
    Flatten,
    /// Mean over spatial positions, one value per channel.
    GlobalAverage,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    /// Side length of the square RGB input.
    pub input_size: usize,
    /// Output channels of each conv block.
    pub conv_channels: Vec<usize>,
    pub pooling: Pooling,
    /// Width of the first dense layer.
    pub hidden: usize,
    pub dropout: f64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self { input_size: 64, conv_channels: vec![8, 16, 32], pooling: Pooling::Flatten, hidden: 1024, dropout: 0.5 }
    }
}

pub const INPUT_CHANNELS: usize = 3;
pub const CLASSES: usize = 2;

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.conv_channels.iter().any(|&c| c == 0) || self.hidden == 0 {
            return Err(Error::InvalidParameter("layer widths must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidParameter(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if self.feature_size() == 0 {
            return Err(Error::InvalidParameter(format!(
                "input size {} is too small for {} pooling stages",
                self.input_size,
                self.conv_channels.len()
            )));
        }
        Ok(())
    }

    /// Spatial side length after all pooling stages.
    pub fn feature_size(&self) -> usize {
        self.conv_channels.iter().fold(self.input_size, |s, _| s / 2)
    }

    pub fn flat_features(&self) -> usize {
        let c = self.conv_channels.last().copied().unwrap_or(INPUT_CHANNELS);
        match self.pooling {
            Pooling::GlobalAverage => c,
            Pooling::Flatten => c * self.feature_size() * self.feature_size(),
        }
    }

    /// Tensor shapes in storage order: conv weights and biases per block,
    /// then the two dense layers.
    pub fn tensor_shapes(&self) -> Vec<Vec<usize>> {
        let mut shapes = Vec::new();
        let mut c_in = INPUT_CHANNELS;
        for &c_out in &self.conv_channels {
            shapes.push(vec![c_out, c_in, 3, 3]);
            shapes.push(vec![c_out]);
            c_in = c_out;
        }
        shapes.push(vec![self.hidden, self.flat_features()]);
        shapes.push(vec![self.hidden]);
        shapes.push(vec![CLASSES, self.hidden]);
        shapes.push(vec![CLASSES]);
        shapes
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            max_epochs: 50,
            patience: 10,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be at least 1".into()));
        }
        if self.patience > self.max_epochs {
            return Err(Error::InvalidParameter("patience exceeds max epochs".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return Err(Error::InvalidParameter("Adam betas must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shapes() {
        let spec = ModelSpec::default();
        assert_eq!(spec.feature_size(), 8);
        assert_eq!(spec.flat_features(), 32 * 64);
        let shapes = spec.tensor_shapes();
        assert_eq!(shapes.len(), 10);
        assert_eq!(shapes[6], vec![1024, 2048]);
        assert_eq!(shapes[8], vec![2, 1024]);
        let gap = ModelSpec { pooling: Pooling::GlobalAverage, ..spec };
        assert_eq!(gap.flat_features(), 32);
        assert_eq!(gap.tensor_shapes()[6], vec![1024, 32]);
    }

    #[test]
    fn validation() {
        assert!(ModelSpec::default().validate().is_ok());
        assert!(ModelSpec { input_size: 4, ..ModelSpec::default() }.validate().is_err());
        assert!(ModelSpec { dropout: 1.0, ..ModelSpec::default() }.validate().is_err());
        assert!(TrainConfig { patience: 60, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { batch_size: 0, ..TrainConfig::default() }.validate().is_err());
    }
}
