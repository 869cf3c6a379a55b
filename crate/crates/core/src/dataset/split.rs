use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{derive_seed, Sample, Split};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    /// Train, validation and test fractions.
    pub ratios: (f64, f64, f64),
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { ratios: (0.8, 0.1, 0.1), seed: 0, stratified: true }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let (a, b, c) = self.ratios;
        if ![a, b, c].iter().all(|r| r.is_finite() && *r > 0.0) {
            return Err(Error::InvalidParameter("split ratios must be positive".into()));
        }
        if (a + b + c - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("split ratios sum to {}, not 1", a + b + c)));
        }
        Ok(())
    }
}

fn round_half_up(x: f64) -> usize {
    // The guard absorbs representation error such as 0.1 * 1175 landing a
    // hair below 117.5.
    (x + 0.5 + 1e-9).floor() as usize
}

/// `(train, val, test)` sizes for a group of `n` samples. The validation and
/// test parts are rounded half up and training takes the remainder.
pub fn split_counts(n: usize, ratios: (f64, f64, f64)) -> Result<(usize, usize, usize)> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("cannot split {n} samples into three parts")));
    }
    let val = round_half_up(ratios.1 * n as f64);
    let test = round_half_up(ratios.2 * n as f64);
    if val + test > n {
        return Err(Error::InvalidParameter(format!("validation and test parts exceed {n} samples")));
    }
    Ok((n - val - test, val, test))
}

fn assign(samples: &mut [Sample], members: &mut [usize], ratios: (f64, f64, f64), seed: u64) -> Result<()> {
    let (_, val, test) = split_counts(members.len(), ratios)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    members.shuffle(&mut rng);
    for (k, &i) in members.iter().enumerate() {
        samples[i].split = if k < val {
            Split::Val
        } else if k < val + test {
            Split::Test
        } else {
            Split::Train
        };
    }
    Ok(())
}

/// Assigns every sample to train, validation or test.
///
/// With `stratified` set each class is split separately, so per-class counts
/// follow [`split_counts`]. Membership is a seeded shuffle; existing split
/// assignments are overwritten.
pub fn split_dataset(samples: &[Sample], spec: &SplitSpec) -> Result<Vec<Sample>> {
    spec.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut out = samples.to_vec();
    if spec.stratified {
        for class in 0..2u8 {
            let mut members: Vec<usize> = (0..out.len()).filter(|&i| out[i].label == class).collect();
            if members.is_empty() {
                return Err(Error::InvalidParameter(format!("class {class} has no samples")));
            }
            assign(&mut out, &mut members, spec.ratios, derive_seed(spec.seed, &[class as u64]))?;
        }
    } else {
        let mut members: Vec<usize> = (0..out.len()).collect();
        assign(&mut out, &mut members, spec.ratios, derive_seed(spec.seed, &[2]))?;
    }
    Ok(out)
}
