use super::{intensity_plane, pixel_intensity, FundusImage, GrayChannel, Rgb};
use crate::error::{Error, Result};
use crate::scalar::round_to_u8;

/// Lookup table for classic histogram equalization.
///
/// Returns `None` when at most one distinct value occurs; the caller should
/// leave such inputs unchanged.
pub fn equalization_lut(hist: &[u64; 256]) -> Option<[u8; 256]> {
    let total: u64 = hist.iter().sum();
    let mut cdf = [0u64; 256];
    let mut acc = 0u64;
    for (c, &h) in cdf.iter_mut().zip(hist) {
        acc += h;
        *c = acc;
    }
    let cdf_min = cdf.iter().copied().find(|&c| c > 0)?;
    if total == cdf_min {
        return None;
    }
    let denom = (total - cdf_min) as f64;
    let mut lut = [0u8; 256];
    for (v, slot) in lut.iter_mut().enumerate() {
        let num = cdf[v].saturating_sub(cdf_min) as f64;
        *slot = round_to_u8(num / denom * 255.0);
    }
    Some(lut)
}

fn histogram(values: impl Iterator<Item = u8>) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for v in values {
        hist[v as usize] += 1;
    }
    hist
}

pub fn equalize_gray(ch: &GrayChannel) -> Result<GrayChannel> {
    if ch.is_empty() {
        return Err(Error::EmptyInput);
    }
    let hist = histogram(ch.values().iter().copied());
    match equalization_lut(&hist) {
        None => Ok(ch.clone()),
        Some(lut) => GrayChannel::new(
            ch.width(),
            ch.height(),
            ch.values().iter().map(|&v| lut[v as usize]).collect(),
        ),
    }
}

/// Moves a pixel from intensity `from` to intensity `to` without changing hue.
///
/// Darkening scales every channel by `to / from`. Brightening moves each
/// channel toward white by the same fraction, which never leaves the gamut.
pub fn hue_preserving_shift(px: Rgb, from: f64, to: f64) -> Rgb {
    if from <= 0.0 {
        return [0, 0, 0];
    }
    let alpha = to / from;
    if alpha <= 1.0 {
        px.map(|c| round_to_u8(alpha * c as f64))
    } else {
        let t = (to - from) / (255.0 - from);
        px.map(|c| {
            let c = c as f64;
            round_to_u8(c + (255.0 - c) * t)
        })
    }
}

fn apply_lut(img: &FundusImage, lut: &[u8; 256], mask: Option<&[bool]>) -> FundusImage {
    let mut out = img.clone();
    for (i, px) in out.pixels_mut().iter_mut().enumerate() {
        if mask.is_some_and(|m| !m[i]) {
            continue;
        }
        let from = pixel_intensity(*px);
        let to = lut[from as usize];
        *px = hue_preserving_shift(*px, from as f64, to as f64);
    }
    out
}

/// Equalizes the mean-intensity plane and rescales each pixel's channels to
/// the new intensity, preserving hue.
pub fn equalize_color_hue_preserving(img: &FundusImage) -> Result<FundusImage> {
    let plane = intensity_plane(img);
    let hist = histogram(plane.values().iter().copied());
    match equalization_lut(&hist) {
        None => Ok(img.clone()),
        Some(lut) => Ok(apply_lut(img, &lut, None)),
    }
}

/// Like [`equalize_color_hue_preserving`], but the histogram is built from
/// (and the mapping applied to) only the pixels where `mask` is set. Other
/// pixels are copied through.
pub fn equalize_color_hue_preserving_masked(img: &FundusImage, mask: &[bool]) -> Result<FundusImage> {
    if mask.len() != img.pixels().len() {
        return Err(Error::BufferSize { expected: img.pixels().len(), actual: mask.len() });
    }
    let hist = histogram(
        img.pixels()
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(&p, _)| pixel_intensity(p)),
    );
    if hist.iter().all(|&h| h == 0) {
        return Err(Error::EmptyInput);
    }
    match equalization_lut(&hist) {
        None => Ok(img.clone()),
        Some(lut) => Ok(apply_lut(img, &lut, Some(mask))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(values: &[u8]) -> GrayChannel {
        GrayChannel::new(values.len(), 1, values.to_vec()).unwrap()
    }

    #[test]
    fn two_level_channel_is_fixed() {
        let ch = GrayChannel::new(2, 2, vec![0, 0, 255, 255]).unwrap();
        assert_eq!(equalize_gray(&ch).unwrap().values(), &[0, 0, 255, 255]);
    }

    #[test]
    fn skewed_channel_stretches() {
        let ch = GrayChannel::new(2, 2, vec![10, 10, 10, 200]).unwrap();
        assert_eq!(equalize_gray(&ch).unwrap().values(), &[0, 0, 0, 255]);
    }

    #[test]
    fn constant_channel_unchanged() {
        let ch = GrayChannel::new(2, 2, vec![7; 4]).unwrap();
        assert_eq!(equalize_gray(&ch).unwrap().values(), &[7, 7, 7, 7]);
    }

    #[test]
    fn empty_channel_errors() {
        let ch = GrayChannel::new(0, 0, vec![]).unwrap();
        assert!(matches!(equalize_gray(&ch), Err(Error::EmptyInput)));
    }

    #[test]
    fn three_levels() {
        // cdf = 1, 3, 4; cdf_min = 1 -> (0, 2/3, 1) * 255
        assert_eq!(equalize_gray(&gray(&[5, 9, 9, 40])).unwrap().values(), &[0, 170, 170, 255]);
    }

    #[test]
    fn darkening_branch_scales_channels() {
        assert_eq!(hue_preserving_shift([100, 50, 150], 100.0, 50.0), [50, 25, 75]);
    }

    #[test]
    fn brightening_branch_moves_toward_white() {
        assert_eq!(hue_preserving_shift([200, 100, 0], 100.0, 177.5), [228, 178, 128]);
    }

    #[test]
    fn black_stays_black() {
        for to in [0.0, 10.0, 255.0] {
            assert_eq!(hue_preserving_shift([0, 0, 0], 0.0, to), [0, 0, 0]);
        }
    }

    #[test]
    fn color_equalization_of_two_levels() {
        let img = FundusImage::new(2, 1, vec![[30, 20, 10], [90, 60, 30]]).unwrap();
        // intensities 20 and 60 -> 0 and 255
        let out = equalize_color_hue_preserving(&img).unwrap();
        assert_eq!(out.pixels(), &[[0, 0, 0], [255, 255, 255]]);
    }

    #[test]
    fn masked_equalization_ignores_background() {
        let img = FundusImage::new(4, 1, vec![[0, 0, 0], [0, 0, 0], [40, 40, 40], [80, 80, 80]]).unwrap();
        let mask = [false, false, true, true];
        let out = equalize_color_hue_preserving_masked(&img, &mask).unwrap();
        assert_eq!(out.pixels(), &[[0, 0, 0], [0, 0, 0], [0, 0, 0], [255, 255, 255]]);
        assert!(matches!(
            equalize_color_hue_preserving_masked(&img, &[false; 4]),
            Err(Error::EmptyInput)
        ));
    }
}
