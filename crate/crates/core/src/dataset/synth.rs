use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{derive_seed, write_manifest, Sample, Split};
use crate::error::{Error, Result};
use crate::Ellipse;
use crate::imaging::{write_png, FundusImage};
use crate::scalar::round_to_u8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthOptions {
    /// Width and height of the generated photographs.
    pub size: usize,
    /// Render each positive on the same scene and noise as its negative
    /// partner, so the pair differs only by the lesion.
    pub paired: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self { size: 256, paired: false }
    }
}

/// A planted lesion: a faint yellowish disc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lesion {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    /// Mean intensity increase at the lesion center.
    pub contrast: f64,
}

/// Everything needed to render one synthetic photograph.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub size: usize,
    pub fov: Ellipse,
    pub base: [f64; 3],
    pub disc: (f64, f64, f64),
    /// Width of the darker macular region around the FOV center.
    pub macula: f64,
    /// Each vessel is a polyline with a stroke half-width.
    pub vessels: Vec<(Vec<(f64, f64)>, f64)>,
    pub texture: [(f64, f64, f64, f64); 3],
    pub noise_seed: u64,
    /// Drawn for every scene; only planted in positives.
    pub lesion: Lesion,
}

fn range(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Draws scene `index` from `seed`. The lesion is drawn for every scene so
/// a negative and a positive built from the same scene share everything
/// else.
pub fn draw_scene(seed: u64, index: u64, size: usize) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x5CE4E]));
    rng.set_stream(index);
    let s = size as f64;
    let c = (s - 1.0) / 2.0;
    let r = range(&mut rng, 0.45, 0.48) * s;
    let fov = Ellipse {
        cx: c + range(&mut rng, -0.01, 0.01) * s,
        cy: c + range(&mut rng, -0.01, 0.01) * s,
        a: r,
        b: r * range(&mut rng, 0.96, 0.99),
        theta: range(&mut rng, 0.0, PI),
    };
    let base = [range(&mut rng, 150.0, 200.0), range(&mut rng, 70.0, 110.0), range(&mut rng, 25.0, 55.0)];

    let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let disc = (
        fov.cx + side * range(&mut rng, 0.55, 0.65) * r,
        fov.cy + range(&mut rng, -0.1, 0.1) * r,
        range(&mut rng, 0.08, 0.12) * r,
    );

    let macula = range(&mut rng, 0.18, 0.24) * r;
    let n_vessels = rng.random_range(3..=6);
    let vessels = (0..n_vessels)
        .map(|_| {
            let mut heading = range(&mut rng, 0.0, 2.0 * PI);
            let (mut x, mut y) = (disc.0, disc.1);
            let steps = rng.random_range(6..=10);
            let step = r * 0.12;
            let mut pts = vec![(x, y)];
            for _ in 0..steps {
                heading += range(&mut rng, -0.35, 0.35);
                x += step * heading.cos();
                y += step * heading.sin();
                pts.push((x, y));
            }
            (pts, range(&mut rng, 0.006, 0.012) * s)
        })
        .collect();

    let mut texture = [(0.0, 0.0, 0.0, 0.0); 3];
    for t in &mut texture {
        *t = (range(&mut rng, 2.0, 6.0) / s, range(&mut rng, 0.0, 2.0 * PI), range(&mut rng, 0.0, 2.0 * PI), range(&mut rng, 3.0, 7.0));
    }
    let noise_seed = rng.random();

    // Anywhere within the central third of the field of view.
    let rho = (r / 3.0) * rng.random::<f64>().sqrt();
    let phi = range(&mut rng, 0.0, 2.0 * PI);
    let lesion = Lesion {
        x: fov.cx + rho * phi.cos(),
        y: fov.cy + rho * phi.sin(),
        radius: range(&mut rng, 0.05, 0.10) * 2.0 * r,
        contrast: range(&mut rng, 10.0, 25.0),
    };
    Scene { size, fov, base, disc, macula, vessels, texture, noise_seed, lesion }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    ((p.0 - a.0 - t * dx).powi(2) + (p.1 - a.1 - t * dy).powi(2)).sqrt()
}

/// Renders a scene, planting `lesion` when given. Pixels outside the field
/// of view are black and every pixel inside has intensity above 10.
pub fn render_fundus(scene: &Scene, lesion: Option<&Lesion>) -> FundusImage {
    let n = scene.size;
    let fov = &scene.fov;
    let mut noise = ChaCha8Rng::seed_from_u64(scene.noise_seed);
    let mut pixels = Vec::with_capacity(n * n);
    for y in 0..n {
        for x in 0..n {
            let (xf, yf) = (x as f64, y as f64);
            // One noise draw per pixel, inside or out, keeps paired renders aligned.
            let jitter = [noise.random::<f64>(), noise.random::<f64>(), noise.random::<f64>()];
            let rho2 = fov.implicit(xf, yf);
            if rho2 > 1.0 {
                pixels.push([0, 0, 0]);
                continue;
            }
            // Illumination falls off toward the rim and the macula at the
            // center is darker than its surroundings.
            let macula = (-((xf - fov.cx).powi(2) + (yf - fov.cy).powi(2)) / (2.0 * scene.macula.powi(2))).exp();
            let shade = (1.0 - 0.15 * rho2) * (1.0 - 0.3 * macula);
            let tex: f64 = scene.texture.iter().map(|&(f, p, q, amp)| amp * (f * xf + p).sin() * (f * yf + q).cos()).sum();
            let mut px = [0.0; 3];
            for c in 0..3 {
                px[c] = scene.base[c] * shade + tex;
            }

            let (dx, dy, dr) = scene.disc;
            let dd = ((xf - dx).powi(2) + (yf - dy).powi(2)).sqrt() / dr;
            if dd < 1.5 {
                let glow = 70.0 * (1.0 - dd / 1.5).powi(2);
                px[0] += glow;
                px[1] += glow;
                px[2] += 0.6 * glow;
            }

            let mut darken: f64 = 1.0;
            for (pts, hw) in &scene.vessels {
                let d = pts.windows(2).map(|s| segment_distance((xf, yf), s[0], s[1])).fold(f64::INFINITY, f64::min);
                if d < *hw {
                    darken = darken.min(0.55 + 0.45 * d / hw);
                }
            }
            for v in &mut px {
                *v *= darken;
            }

            if let Some(l) = lesion {
                let d = ((xf - l.x).powi(2) + (yf - l.y).powi(2)).sqrt() / l.radius;
                if d < 1.0 {
                    let k = l.contrast * (1.0 - d * d).sqrt().min(0.8) / 0.8;
                    px[0] += 1.3 * k;
                    px[1] += 1.3 * k;
                    px[2] += 0.4 * k;
                }
            }

            let mut rgb = [0u8; 3];
            for c in 0..3 {
                rgb[c] = round_to_u8((px[c] + 6.0 * (jitter[c] - 0.5)).max(16.0));
            }
            pixels.push(rgb);
        }
    }
    FundusImage::new(n, n, pixels).expect("buffer sized to n*n")
}

/// Writes `2 * n_per_class` PNG images and `manifest.csv` into `out_dir`,
/// returning the manifest path. Output is a pure function of the seed.
pub fn generate_synthetic(n_per_class: usize, seed: u64, out_dir: impl AsRef<Path>) -> Result<PathBuf> {
    generate_synthetic_with(n_per_class, seed, out_dir, &SynthOptions::default())
}

pub fn generate_synthetic_with(n_per_class: usize, seed: u64, out_dir: impl AsRef<Path>, opts: &SynthOptions) -> Result<PathBuf> {
    if n_per_class == 0 {
        return Err(Error::InvalidParameter("n_per_class must be at least 1".into()));
    }
    if opts.size < 16 {
        return Err(Error::InvalidParameter("synthetic images must be at least 16 pixels wide".into()));
    }
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let jobs: Vec<(usize, u8)> = (0..n_per_class).flat_map(|i| [(i, 0u8), (i, 1u8)]).collect();
    let samples = jobs
        .par_iter()
        .map(|&(i, label)| {
            let index = if opts.paired { i as u64 } else { (2 * i + label as usize) as u64 };
            let scene = draw_scene(seed, index, opts.size);
            let img = render_fundus(&scene, (label == 1).then_some(&scene.lesion));
            let name = format!("{}_{i:05}.png", if label == 1 { "pos" } else { "neg" });
            write_png(&img, out_dir.join(&name))?;
            Ok(Sample { path: name.into(), label, split: Split::Unassigned })
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = out_dir.join("manifest.csv");
    write_manifest(&manifest, &samples)?;
    Ok(manifest)
}
