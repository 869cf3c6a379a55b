//! Field-of-view detection: foreground segmentation, boundary extraction and
//! robust direct least-squares ellipse fitting.

mod cubic;
mod fit;
mod segment;

pub use fit::{algebraic_residual, conic_to_geometric, fit_ellipse_direct, fit_ellipse_robust};
pub use segment::{boundary_points, detect_fov, otsu_threshold, segment_foreground, FovConfig, ThresholdPolicy};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T> Point<T> {
    pub const fn new(x: T, y: T) -> Self {
        Self { x, y }
    }
}

/// Ellipse in pixel coordinates. `a` is the semi-major axis and `theta` its
/// angle from the x axis, normalized to `[0, pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipse<T> {
    pub cx: T,
    pub cy: T,
    pub a: T,
    pub b: T,
    pub theta: T,
}

impl<T: Scalar> Ellipse<T> {
    /// Value of the normalized implicit form at `(x, y)`: below 1 inside,
    /// exactly 1 on the boundary.
    #[inline]
    pub fn implicit(&self, x: T, y: T) -> T {
        let (s, c) = self.theta.sin_cos();
        let dx = x - self.cx;
        let dy = y - self.cy;
        let u = (dx * c + dy * s) / self.a;
        let v = (dy * c - dx * s) / self.b;
        u * u + v * v
    }

    #[inline]
    pub fn contains(&self, x: T, y: T) -> bool {
        self.implicit(x, y) <= T::one()
    }

    /// Half width and half height of the axis-aligned bounding box.
    pub fn half_extents(&self) -> (T, T) {
        let (s, c) = self.theta.sin_cos();
        let (a2, b2) = (self.a * self.a, self.b * self.b);
        ((a2 * c * c + b2 * s * s).sqrt(), (a2 * s * s + b2 * c * c).sqrt())
    }

    pub fn area(&self) -> T {
        T::lit(std::f64::consts::PI) * self.a * self.b
    }

    /// Point at parameter `t` on the boundary.
    pub fn point_at(&self, t: T) -> Point<T> {
        let (s, c) = self.theta.sin_cos();
        let (u, v) = (self.a * t.cos(), self.b * t.sin());
        Point::new(self.cx + u * c - v * s, self.cy + u * s + v * c)
    }
}

/// Implicit conic `A x^2 + B xy + C y^2 + D x + E y + F = 0`, stored with a
/// unit-norm coefficient vector and `A + C >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConicCoefficients<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub e: T,
    pub f: T,
}

impl<T: Scalar> ConicCoefficients<T> {
    pub fn from_array(v: [T; 6]) -> Self {
        Self { a: v[0], b: v[1], c: v[2], d: v[3], e: v[4], f: v[5] }
    }

    pub fn to_array(&self) -> [T; 6] {
        [self.a, self.b, self.c, self.d, self.e, self.f]
    }

    /// Rescales to unit norm with a nonnegative quadratic trace. Returns
    /// `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let v = self.to_array();
        let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return None;
        }
        let sign = if v[0] + v[2] < T::zero() { -T::one() } else { T::one() };
        Some(Self::from_array(v.map(|x| sign * x / norm)))
    }

    /// `B^2 - 4AC`; negative for ellipses.
    pub fn discriminant(&self) -> T {
        self.b * self.b - T::lit(4.0) * self.a * self.c
    }

    #[inline]
    pub fn eval(&self, x: T, y: T) -> T {
        self.a * x * x + self.b * x * y + self.c * y * y + self.d * x + self.e * y + self.f
    }
}

/// Row-major boolean raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> crate::Result<Self> {
        if bits.len() != width * height {
            return Err(crate::Error::BufferSize { expected: width * height, actual: bits.len() });
        }
        Ok(Self { width, height, bits })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}
