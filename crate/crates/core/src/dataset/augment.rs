use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{sample_bilinear, FundusImage};
use crate::scalar::round_to_u8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentParams {
    /// Maximum absolute rotation in degrees.
    pub rotation_max: f64,
    pub hflip_prob: f64,
    pub vflip_prob: f64,
    pub scale_range: (f64, f64),
    /// Maximum shift as a fraction of width and height.
    pub translate_frac: f64,
    pub seed: u64,
}

impl Default for AugmentParams {
    fn default() -> Self {
        Self { rotation_max: 15.0, hflip_prob: 0.5, vflip_prob: 0.5, scale_range: (0.9, 1.1), translate_frac: 0.1, seed: 0 }
    }
}

impl AugmentParams {
    /// Parameters that leave every image unchanged.
    pub fn identity() -> Self {
        Self { rotation_max: 0.0, hflip_prob: 0.0, vflip_prob: 0.0, scale_range: (1.0, 1.0), translate_frac: 0.0, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        let (lo, hi) = self.scale_range;
        if !prob(self.hflip_prob) || !prob(self.vflip_prob) {
            return Err(Error::InvalidParameter("flip probabilities must lie in [0, 1]".into()));
        }
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidParameter("scale range must be positive with lo <= hi".into()));
        }
        if !(self.rotation_max >= 0.0 && self.rotation_max.is_finite()) {
            return Err(Error::InvalidParameter("rotation_max must be non-negative".into()));
        }
        if !(self.translate_frac >= 0.0 && self.translate_frac.is_finite()) {
            return Err(Error::InvalidParameter("translate_frac must be non-negative".into()));
        }
        Ok(())
    }
}

/// One concrete draw of the augmentation transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineDraw {
    pub angle_deg: f64,
    pub hflip: bool,
    pub vflip: bool,
    pub scale: f64,
    /// Shift in pixels.
    pub tx: f64,
    pub ty: f64,
}

impl AffineDraw {
    pub const IDENTITY: AffineDraw = AffineDraw { angle_deg: 0.0, hflip: false, vflip: false, scale: 1.0, tx: 0.0, ty: 0.0 };
}

fn uniform(rng: &mut ChaCha8Rng, half_width: f64) -> f64 {
    half_width * (2.0 * rng.random::<f64>() - 1.0)
}

/// Draws the transform for `draw_index` from the stream `(params.seed,
/// draw_index)`. Every draw consumes the same amount of randomness, so the
/// result depends only on the key.
pub fn draw_affine(params: &AugmentParams, width: usize, height: usize, draw_index: u64) -> AffineDraw {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(draw_index);
    let angle_deg = uniform(&mut rng, params.rotation_max);
    let hflip = rng.random::<f64>() < params.hflip_prob;
    let vflip = rng.random::<f64>() < params.vflip_prob;
    let (lo, hi) = params.scale_range;
    let scale = lo + (hi - lo) * rng.random::<f64>();
    let tx = uniform(&mut rng, params.translate_frac * width as f64);
    let ty = uniform(&mut rng, params.translate_frac * height as f64);
    AffineDraw { angle_deg, hflip, vflip, scale, tx, ty }
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-9 {
        r
    } else {
        v
    }
}

/// Applies rotation about the center, then flips, then scaling about the
/// center, then translation. Each output pixel is pulled back through the
/// inverse map and sampled bilinearly; samples outside the source are black.
pub fn apply_affine(img: &FundusImage, t: &AffineDraw) -> FundusImage {
    let (w, h) = (img.width(), img.height());
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let (sin, cos) = t.angle_deg.to_radians().sin_cos();
    let fx = if t.hflip { -1.0 } else { 1.0 };
    let fy = if t.vflip { -1.0 } else { 1.0 };
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            let u = fx * (x as f64 - cx - t.tx) / t.scale;
            let v = fy * (y as f64 - cy - t.ty) / t.scale;
            let sx = snap(cx + cos * u + sin * v);
            let sy = snap(cy - sin * u + cos * v);
            let px = match sample_bilinear(img, sx, sy) {
                Some(p) => [round_to_u8(p[0]), round_to_u8(p[1]), round_to_u8(p[2])],
                None => [0, 0, 0],
            };
            out.set(x, y, px);
        }
    }
    out
}

/// Training-time augmentation keyed by `(params.seed, draw_index)`.
pub fn augment_sample(img: &FundusImage, params: &AugmentParams, draw_index: u64) -> FundusImage {
    let t = draw_affine(params, img.width(), img.height(), draw_index);
    if t == AffineDraw::IDENTITY {
        return img.clone();
    }
    apply_affine(img, &t)
}
