//! Pixel-level primitives on 8-bit RGB rasters.

mod equalize;
mod geometry;
mod io;

pub use equalize::{
    equalization_lut, equalize_color_hue_preserving, equalize_color_hue_preserving_masked,
    equalize_gray, hue_preserving_shift,
};
pub use geometry::{crop_to_ellipse_bbox, ellipse_bbox, mask_outside_ellipse, resize_bilinear, sample_bilinear};
pub use io::{decode_image, read_image, write_image, write_png, write_ppm};

use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

/// 8-bit RGB raster, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FundusImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl FundusImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        if pixels.len() != width * height {
            return Err(Error::BufferSize { expected: width * height, actual: pixels.len() });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, color: Rgb) -> Result<Self> {
        Self::new(width, height, vec![color; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Rgb) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    #[inline]
    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, px: Rgb) {
        self.pixels[y * self.width + x] = px;
    }

    pub fn into_pixels(self) -> Vec<Rgb> {
        self.pixels
    }
}

/// Single-channel 8-bit plane, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayChannel {
    width: usize,
    height: usize,
    values: Vec<u8>,
}

impl GrayChannel {
    pub fn new(width: usize, height: usize, values: Vec<u8>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::BufferSize { expected: width * height, actual: values.len() });
        }
        Ok(Self { width, height, values })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.values[y * self.width + x]
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Mean of the three channels, rounded half away from zero.
#[inline]
pub fn pixel_intensity(px: Rgb) -> u8 {
    let sum = px[0] as u16 + px[1] as u16 + px[2] as u16;
    // sum / 3 never lands on a half, so rounding reduces to (sum + 1) / 3.
    ((sum + 1) / 3) as u8
}

pub fn intensity_plane(img: &FundusImage) -> GrayChannel {
    GrayChannel {
        width: img.width,
        height: img.height,
        values: img.pixels.iter().map(|&p| pixel_intensity(p)).collect(),
    }
}
