use serde::{Deserialize, Serialize};

use super::{fit_ellipse_robust, BinaryMask, Ellipse, Point};
use crate::error::{Error, Result};
use crate::imaging::{intensity_plane, FundusImage, GrayChannel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdPolicy {
    Fixed(u8),
    Otsu,
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy::Fixed(10)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FovConfig {
    pub threshold: ThresholdPolicy,
    pub trim_fraction: f64,
    pub iterations: usize,
    /// Fits covering less than this fraction of the image are rejected.
    pub min_area_fraction: f64,
}

impl Default for FovConfig {
    fn default() -> Self {
        Self { threshold: ThresholdPolicy::default(), trim_fraction: 0.1, iterations: 3, min_area_fraction: 0.1 }
    }
}

/// Otsu threshold over a 256-bin histogram; values `> t` are foreground.
///
/// When a run of consecutive thresholds reaches the maximum between-class
/// variance (empty bins produce such plateaus) the midpoint of the first run
/// is returned.
pub fn otsu_threshold(hist: &[u64; 256]) -> u8 {
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return 0;
    }
    let sum_all: f64 = hist.iter().enumerate().map(|(v, &h)| v as f64 * h as f64).sum();
    let (mut w0, mut sum0) = (0u64, 0.0f64);
    let mut best = f64::NEG_INFINITY;
    let (mut first, mut last) = (0usize, 0usize);
    for t in 0..256 {
        w0 += hist[t];
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let mu0 = sum0 / w0 as f64;
        let mu1 = (sum_all - sum0) / w1 as f64;
        let between = w0 as f64 * w1 as f64 * (mu0 - mu1) * (mu0 - mu1);
        let tol = if best.is_finite() { 1e-9 * best.abs() } else { 0.0 };
        if between > best + tol {
            best = between;
            first = t;
            last = t;
        } else if (between - best).abs() <= tol && last + 1 == t {
            last = t;
        }
    }
    ((first + last) / 2) as u8
}

pub fn segment_foreground(ch: &GrayChannel, policy: ThresholdPolicy) -> BinaryMask {
    let threshold = match policy {
        ThresholdPolicy::Fixed(t) => t,
        ThresholdPolicy::Otsu => {
            let mut hist = [0u64; 256];
            for &v in ch.values() {
                hist[v as usize] += 1;
            }
            otsu_threshold(&hist)
        }
    };
    let bits = ch.values().iter().map(|&v| v > threshold).collect();
    BinaryMask::new(ch.width(), ch.height(), bits).expect("same dimensions as the channel")
}

/// Foreground pixels with at least one background (or off-image) 4-neighbor.
pub fn boundary_points(mask: &BinaryMask) -> Vec<Point<f64>> {
    let (w, h) = (mask.width(), mask.height());
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            let edge = x == 0
                || y == 0
                || x + 1 == w
                || y + 1 == h
                || !mask.get(x - 1, y)
                || !mask.get(x + 1, y)
                || !mask.get(x, y - 1)
                || !mask.get(x, y + 1);
            if edge {
                out.push(Point::new(x as f64, y as f64));
            }
        }
    }
    out
}

/// Segments the illuminated region and fits its boundary robustly.
pub fn detect_fov(img: &FundusImage, cfg: &FovConfig) -> Result<Ellipse<f64>> {
    let mask = segment_foreground(&intensity_plane(img), cfg.threshold);
    let points = boundary_points(&mask);
    let ellipse = fit_ellipse_robust(&points, cfg.trim_fraction, cfg.iterations)?;
    let fraction = ellipse.area() / (img.width() * img.height()) as f64;
    if fraction < cfg.min_area_fraction {
        return Err(Error::ImplausibleFov { fraction });
    }
    Ok(ellipse)
}
