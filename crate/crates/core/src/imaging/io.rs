use std::fs;
use std::io::Write;
use std::path::Path;

use image::ImageFormat;

use super::FundusImage;
use crate::error::{Error, Result};

/// Reads PNG or binary PPM. Alpha is discarded.
pub fn read_image(path: impl AsRef<Path>) -> Result<FundusImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes).map_err(|source| Error::Image { path: path.to_path_buf(), source })
}

pub fn decode_image(bytes: &[u8]) -> std::result::Result<FundusImage, image::ImageError> {
    let rgb = image::load_from_memory(bytes)?.into_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let pixels = rgb.pixels().map(|p| p.0).collect();
    Ok(FundusImage::new(w, h, pixels).expect("decoder produced a consistent buffer"))
}

fn raw_bytes(img: &FundusImage) -> Vec<u8> {
    img.pixels().iter().flatten().copied().collect()
}

pub fn write_png(img: &FundusImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    image::save_buffer_with_format(
        path,
        &raw_bytes(img),
        img.width() as u32,
        img.height() as u32,
        image::ExtendedColorType::Rgb8,
        ImageFormat::Png,
    )
    .map_err(|source| Error::Image { path: path.to_path_buf(), source })
}

/// Writes binary PPM (P6, maxval 255).
pub fn write_ppm(img: &FundusImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    buf.extend(raw_bytes(img));
    fs::File::create(path)
        .and_then(|mut f| f.write_all(&buf))
        .map_err(|e| Error::io(path, e))
}

/// Picks PPM for `.ppm`/`.pnm` extensions and PNG otherwise.
pub fn write_image(img: &FundusImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("ppm") | Some("pnm") => write_ppm(img, path),
        _ => write_png(img, path),
    }
}
