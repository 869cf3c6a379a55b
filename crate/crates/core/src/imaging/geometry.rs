use super::FundusImage;
use crate::error::{Error, Result};
use crate::scalar::round_to_u8;
use crate::Ellipse;

fn check_ellipse(e: &Ellipse) -> Result<()> {
    if !(e.a > 0.0 && e.b > 0.0) || !e.a.is_finite() || !e.b.is_finite() {
        return Err(Error::DegenerateEllipse(format!("semi-axes ({}, {})", e.a, e.b)));
    }
    Ok(())
}

/// Blacks out every pixel whose center lies outside `e`.
pub fn mask_outside_ellipse(img: &FundusImage, e: &Ellipse) -> Result<FundusImage> {
    check_ellipse(e)?;
    let mut out = img.clone();
    let w = img.width();
    for (i, px) in out.pixels_mut().iter_mut().enumerate() {
        let (x, y) = ((i % w) as f64, (i / w) as f64);
        if !e.contains(x, y) {
            *px = [0, 0, 0];
        }
    }
    Ok(out)
}

/// Inclusive pixel box `(x0, y0, x1, y1)` of the ellipse's axis-aligned
/// bounding box, clipped to the image. Box edges are rounded half away from
/// zero.
pub fn ellipse_bbox(e: &Ellipse, width: usize, height: usize) -> Result<(usize, usize, usize, usize)> {
    check_ellipse(e)?;
    let (hw, hh) = e.half_extents();
    let x0 = (e.cx - hw).round();
    let x1 = (e.cx + hw).round();
    let y0 = (e.cy - hh).round();
    let y1 = (e.cy + hh).round();
    let (wmax, hmax) = ((width - 1) as f64, (height - 1) as f64);
    if x1 < 0.0 || y1 < 0.0 || x0 > wmax || y0 > hmax {
        return Err(Error::EmptyCrop);
    }
    Ok((
        x0.max(0.0) as usize,
        y0.max(0.0) as usize,
        x1.min(wmax) as usize,
        y1.min(hmax) as usize,
    ))
}

pub fn crop_to_ellipse_bbox(img: &FundusImage, e: &Ellipse) -> Result<FundusImage> {
    let (x0, y0, x1, y1) = ellipse_bbox(e, img.width(), img.height())?;
    FundusImage::from_fn(x1 - x0 + 1, y1 - y0 + 1, |x, y| img.get(x0 + x, y0 + y))
}

/// Bilinear sample at a real pixel-center coordinate. Coordinates outside
/// `[0, w-1] x [0, h-1]` yield `None`.
pub fn sample_bilinear(img: &FundusImage, x: f64, y: f64) -> Option<[f64; 3]> {
    let (wmax, hmax) = ((img.width() - 1) as f64, (img.height() - 1) as f64);
    if !(0.0..=wmax).contains(&x) || !(0.0..=hmax).contains(&y) {
        return None;
    }
    Some(lerp2(img, x, y))
}

#[inline]
fn lerp2(img: &FundusImage, x: f64, y: f64) -> [f64; 3] {
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let (p00, p10, p01, p11) = (img.get(x0, y0), img.get(x1, y0), img.get(x0, y1), img.get(x1, y1));
    let mut out = [0.0; 3];
    for c in 0..3 {
        let top = p00[c] as f64 + (p10[c] as f64 - p00[c] as f64) * fx;
        let bottom = p01[c] as f64 + (p11[c] as f64 - p01[c] as f64) * fx;
        out[c] = top + (bottom - top) * fy;
    }
    out
}

/// Bilinear resize with pixel-center alignment: output pixel `i` samples the
/// source at `(i + 0.5) * in / out - 0.5`, clamped to the image.
pub fn resize_bilinear(img: &FundusImage, out_w: usize, out_h: usize) -> Result<FundusImage> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidDimensions { width: out_w, height: out_h });
    }
    let sx = img.width() as f64 / out_w as f64;
    let sy = img.height() as f64 / out_h as f64;
    let wmax = (img.width() - 1) as f64;
    let hmax = (img.height() - 1) as f64;
    let xs: Vec<f64> = (0..out_w).map(|i| ((i as f64 + 0.5) * sx - 0.5).clamp(0.0, wmax)).collect();
    FundusImage::from_fn(out_w, out_h, |i, j| {
        let y = ((j as f64 + 0.5) * sy - 0.5).clamp(0.0, hmax);
        lerp2(img, xs[i], y).map(round_to_u8)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(cx: f64, cy: f64, r: f64) -> Ellipse {
        Ellipse { cx, cy, a: r, b: r, theta: 0.0 }
    }

    #[test]
    fn mask_keeps_pixels_inside_unit_circle() {
        let img = FundusImage::filled(4, 4, [255; 3]).unwrap();
        let out = mask_outside_ellipse(&img, &circle(1.5, 1.5, 1.0)).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                let d2 = (x as f64 - 1.5).powi(2) + (y as f64 - 1.5).powi(2);
                let expected = if d2 <= 1.0 { [255; 3] } else { [0; 3] };
                assert_eq!(out.get(x, y), expected, "pixel ({x},{y})");
            }
        }
        let kept = out.pixels().iter().filter(|p| p[0] == 255).count();
        assert_eq!(kept, 4);
    }

    #[test]
    fn mask_with_covering_ellipse_is_identity() {
        let img = FundusImage::from_fn(5, 3, |x, y| [x as u8, y as u8, 9]).unwrap();
        assert_eq!(mask_outside_ellipse(&img, &circle(2.0, 1.0, 50.0)).unwrap(), img);
    }

    #[test]
    fn mask_rejects_degenerate_ellipse() {
        let img = FundusImage::filled(2, 2, [1; 3]).unwrap();
        let e = Ellipse { cx: 1.0, cy: 1.0, a: 1.0, b: 0.0, theta: 0.0 };
        assert!(matches!(mask_outside_ellipse(&img, &e), Err(Error::DegenerateEllipse(_))));
    }

    #[test]
    fn crop_box_of_tall_ellipse() {
        let img = FundusImage::filled(100, 100, [3; 3]).unwrap();
        // 10 px horizontally, 20 px vertically: major axis is vertical.
        let e = Ellipse { cx: 50.0, cy: 50.0, a: 20.0, b: 10.0, theta: std::f64::consts::FRAC_PI_2 };
        let out = crop_to_ellipse_bbox(&img, &e).unwrap();
        assert_eq!((out.width(), out.height()), (21, 41));
    }

    #[test]
    fn crop_box_larger_than_image() {
        let img = FundusImage::from_fn(7, 5, |x, y| [x as u8, y as u8, 0]).unwrap();
        assert_eq!(crop_to_ellipse_bbox(&img, &circle(3.0, 2.0, 40.0)).unwrap(), img);
    }

    #[test]
    fn crop_outside_errors() {
        let img = FundusImage::filled(10, 10, [3; 3]).unwrap();
        assert!(matches!(crop_to_ellipse_bbox(&img, &circle(100.0, 100.0, 5.0)), Err(Error::EmptyCrop)));
    }

    #[test]
    fn resize_identity_is_bit_exact() {
        let img = FundusImage::from_fn(9, 6, |x, y| [(x * 29) as u8, (y * 41) as u8, (x * y) as u8]).unwrap();
        assert_eq!(resize_bilinear(&img, 9, 6).unwrap(), img);
    }

    #[test]
    fn resize_constant() {
        let img = FundusImage::filled(5, 3, [12, 200, 77]).unwrap();
        let out = resize_bilinear(&img, 11, 2).unwrap();
        assert!(out.pixels().iter().all(|&p| p == [12, 200, 77]));
    }

    /// Independent scalar oracle for the 1-D case: linear interpolation
    /// between two samples at the mapped source coordinate.
    fn oracle_two_pixels(out_w: usize) -> Vec<u8> {
        (0..out_w)
            .map(|i| {
                let src = ((i as f64 + 0.5) * 2.0 / out_w as f64 - 0.5).clamp(0.0, 1.0);
                (255.0 * src).round() as u8
            })
            .collect()
    }

    #[test]
    fn resize_two_pixel_ramp() {
        let img = FundusImage::new(2, 1, vec![[0; 3], [255; 3]]).unwrap();
        let out = resize_bilinear(&img, 4, 1).unwrap();
        let got: Vec<u8> = out.pixels().iter().map(|p| p[0]).collect();
        assert_eq!(got, oracle_two_pixels(4));
        assert_eq!(got, vec![0, 64, 191, 255]);
    }

    #[test]
    fn resize_rejects_zero() {
        let img = FundusImage::filled(2, 2, [0; 3]).unwrap();
        assert!(resize_bilinear(&img, 0, 4).is_err());
    }

    #[test]
    fn sample_outside_is_none() {
        let img = FundusImage::filled(3, 3, [5; 3]).unwrap();
        assert!(sample_bilinear(&img, -0.1, 1.0).is_none());
        assert!(sample_bilinear(&img, 1.0, 2.5).is_none());
        assert_eq!(sample_bilinear(&img, 2.0, 2.0), Some([5.0; 3]));
    }
}
