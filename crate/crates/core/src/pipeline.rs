//! The per-image preprocessing chain shared by training and inference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fov::{detect_fov, FovConfig};
use crate::imaging::{crop_to_ellipse_bbox, equalize_color_hue_preserving_masked, mask_outside_ellipse, resize_bilinear, FundusImage};
use crate::model::{forward, image_to_input, Mode, Params};
use crate::scalar::Scalar;
use crate::Ellipse;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub fov: FovConfig,
    /// Side length of the square output.
    pub size: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { fov: FovConfig::default(), size: 299 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Preprocessed {
    pub image: FundusImage,
    pub fov: Ellipse,
}

/// Detects the field of view, equalizes the image over the FOV interior,
/// blacks out the background, crops to the FOV bounding box and resizes to
/// `size x size`.
pub fn preprocess(img: &FundusImage, cfg: &PreprocessConfig) -> Result<Preprocessed> {
    if cfg.size == 0 {
        return Err(Error::InvalidParameter("output size must be positive".into()));
    }
    let fov = detect_fov(img, &cfg.fov)?;
    let (w, h) = (img.width(), img.height());
    let inside: Vec<bool> = (0..w * h).map(|i| fov.contains((i % w) as f64, (i / w) as f64)).collect();
    let equalized = equalize_color_hue_preserving_masked(img, &inside)?;
    let masked = mask_outside_ellipse(&equalized, &fov)?;
    let cropped = crop_to_ellipse_bbox(&masked, &fov)?;
    let image = resize_bilinear(&cropped, cfg.size, cfg.size)?;
    Ok(Preprocessed { image, fov })
}

/// Positive-class probability for each preprocessed image, in input order.
pub fn score_images<T: Scalar>(params: &Params<T>, images: &[FundusImage]) -> Result<Vec<f64>> {
    let s = params.spec.input_size;
    if let Some(bad) = images.iter().find(|i| i.width() != s || i.height() != s) {
        return Err(Error::ShapeMismatch(format!("image is {}x{}, model expects {s}x{s}", bad.width(), bad.height())));
    }
    let inputs: Vec<Vec<T>> = images.iter().map(image_to_input).collect();
    Ok(forward(params, &inputs, Mode::Eval)?.iter().map(|p| p[1].as_f64()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{draw_scene, render_fundus};

    #[test]
    fn output_is_square_with_black_corners() {
        let scene = draw_scene(2, 0, 200);
        let img = render_fundus(&scene, None);
        let out = preprocess(&img, &PreprocessConfig { size: 64, ..PreprocessConfig::default() }).unwrap();
        assert_eq!((out.image.width(), out.image.height()), (64, 64));
        assert_eq!(out.image.get(0, 0), [0, 0, 0]);
        assert_eq!(out.image.get(63, 63), [0, 0, 0]);
        assert_ne!(out.image.get(32, 32), [0, 0, 0]);
        assert!((out.fov.cx - scene.fov.cx).abs() < 2.0);
    }

    #[test]
    fn black_image_fails() {
        let img = FundusImage::filled(50, 50, [0, 0, 0]).unwrap();
        assert!(preprocess(&img, &PreprocessConfig::default()).is_err());
    }
}
