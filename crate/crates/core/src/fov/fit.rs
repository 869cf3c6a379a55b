use super::cubic::{inverse3, real_eigenpairs};
use super::{ConicCoefficients, Ellipse, Point};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MIN_POINTS: usize = 6;

type Mat3<T> = [[T; 3]; 3];

fn matmul<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn transpose<T: Scalar>(a: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

fn matvec<T: Scalar>(a: &Mat3<T>, v: &[T; 3]) -> [T; 3] {
    [0, 1, 2].map(|i| (0..3).map(|k| a[i][k] * v[k]).sum())
}

/// Direct least-squares ellipse fit.
///
/// Minimizes the algebraic distance `|D c|^2` subject to `4AC - B^2 = 1`.
/// The 6x6 generalized eigenproblem is reduced to a 3x3 one by eliminating
/// the linear coefficients. Points are centered and scaled to unit RMS
/// before solving, and the result is mapped back to the input frame.
pub fn fit_ellipse_direct<T: Scalar>(points: &[Point<T>]) -> Result<ConicCoefficients<T>> {
    let n = points.len();
    if n < MIN_POINTS {
        return Err(Error::InsufficientPoints { needed: MIN_POINTS, got: n });
    }
    let nf = T::from_usize(n).unwrap();
    let mx = points.iter().map(|p| p.x).sum::<T>() / nf;
    let my = points.iter().map(|p| p.y).sum::<T>() / nf;
    let spread = points
        .iter()
        .map(|p| (p.x - mx) * (p.x - mx) + (p.y - my) * (p.y - my))
        .sum::<T>()
        / (nf * T::lit(2.0));
    let s = spread.sqrt();
    if !(s > T::zero()) || !s.is_finite() {
        return Err(Error::DegenerateConfiguration("points coincide".into()));
    }

    // Quadratic block [u^2, uv, v^2] and linear block [u, v, 1].
    let mut s1 = [[T::zero(); 3]; 3];
    let mut s2 = [[T::zero(); 3]; 3];
    let mut s3 = [[T::zero(); 3]; 3];
    for p in points {
        let u = (p.x - mx) / s;
        let v = (p.y - my) / s;
        let q = [u * u, u * v, v * v];
        let l = [u, v, T::one()];
        for i in 0..3 {
            for j in 0..3 {
                s1[i][j] += q[i] * q[j];
                s2[i][j] += q[i] * l[j];
                s3[i][j] += l[i] * l[j];
            }
        }
    }
    let s3_inv = inverse3(&s3).ok_or_else(|| Error::DegenerateConfiguration("points are collinear".into()))?;
    // Linear part as a function of the quadratic part: l = t * q.
    let t = matmul(&s3_inv, &transpose(&s2)).map(|row| row.map(|x| -x));
    let reduced = {
        let st = matmul(&s2, &t);
        let mut m = s1;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += st[i][j];
            }
        }
        m
    };
    // Premultiply by the inverse of the constraint block [[0,0,2],[0,-1,0],[2,0,0]].
    let half = T::lit(0.5);
    let pencil = [
        reduced[2].map(|x| x * half),
        reduced[1].map(|x| -x),
        reduced[0].map(|x| x * half),
    ];

    let four = T::lit(4.0);
    let best = real_eigenpairs(&pencil)
        .into_iter()
        .filter_map(|(_, v)| {
            let constraint = four * v[0] * v[2] - v[1] * v[1];
            if !(constraint > T::zero()) {
                return None;
            }
            let mv = matvec(&reduced, &v);
            let cost = (0..3).map(|i| v[i] * mv[i]).sum::<T>() / constraint;
            Some((cost, v))
        })
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(_, v)| v)
        .ok_or_else(|| Error::DegenerateConfiguration("no elliptical eigenvector".into()))?;
    let lin = matvec(&t, &best);

    let (a, b, c) = (best[0], best[1], best[2]);
    let (d, e, f) = (lin[0], lin[1], lin[2]);
    let s2 = s * s;
    let two = T::lit(2.0);
    let conic = ConicCoefficients {
        a: a / s2,
        b: b / s2,
        c: c / s2,
        d: -(two * a * mx + b * my) / s2 + d / s,
        e: -(two * c * my + b * mx) / s2 + e / s,
        f: (a * mx * mx + b * mx * my + c * my * my) / s2 - (d * mx + e * my) / s + f,
    };
    conic
        .normalized()
        .ok_or_else(|| Error::DegenerateConfiguration("zero conic".into()))
}

/// Algebraic residual of `p` under the unit-norm form of `conic`.
pub fn algebraic_residual<T: Scalar>(conic: &ConicCoefficients<T>, p: Point<T>) -> T {
    conic.normalized().map_or(T::nan(), |c| c.eval(p.x, p.y))
}

/// Center, semi-axes and orientation of an elliptical conic.
pub fn conic_to_geometric<T: Scalar>(conic: &ConicCoefficients<T>) -> Result<Ellipse<T>> {
    let disc = conic.discriminant();
    if !(disc < T::zero()) {
        return Err(Error::NotAnEllipse(format!("discriminant {disc} is not negative")));
    }
    let k = conic.normalized().ok_or_else(|| Error::NotAnEllipse("zero conic".into()))?;
    let (a, b, c, d, e, f) = (k.a, k.b, k.c, k.d, k.e, k.f);
    let two = T::lit(2.0);
    let den = T::lit(4.0) * a * c - b * b;
    let cx = (b * e - two * c * d) / den;
    let cy = (b * d - two * a * e) / den;
    let f0 = f + (d * cx + e * cy) / two;

    let mean = (a + c) / two;
    let half_diff = (a - c) / two;
    let radius = (half_diff * half_diff + b * b / T::lit(4.0)).sqrt();
    let (small, large) = (mean - radius, mean + radius);
    if !(f0 < T::zero()) || !(small > T::zero()) {
        return Err(Error::NotAnEllipse("imaginary or point ellipse".into()));
    }
    let major = (-f0 / small).sqrt();
    let minor = (-f0 / large).sqrt();

    let pi = T::lit(std::f64::consts::PI);
    let theta = if radius <= T::epsilon() * T::lit(8.0) * mean {
        T::zero()
    } else {
        // atan2 gives the direction of the larger eigenvalue, i.e. the minor axis.
        let minor_dir = b.atan2(a - c) / two;
        let mut th = (minor_dir + pi / two) % pi;
        if th < T::zero() {
            th += pi;
        }
        if th >= pi {
            th -= pi;
        }
        th
    };
    Ok(Ellipse { cx, cy, a: major, b: minor, theta })
}

/// Direct fit with iterative residual trimming.
///
/// Each of `iterations` rounds fits the current inliers, ranks them by
/// absolute algebraic residual (stable sort) and drops the worst
/// `floor(trim_fraction * n)`. The final inliers are refitted.
pub fn fit_ellipse_robust<T: Scalar>(points: &[Point<T>], trim_fraction: f64, iterations: usize) -> Result<Ellipse<T>> {
    if !(0.0..0.5).contains(&trim_fraction) {
        return Err(Error::InvalidParameter(format!("trim fraction {trim_fraction} outside [0, 0.5)")));
    }
    let mut inliers = points.to_vec();
    for _ in 0..iterations {
        let drop = (trim_fraction * inliers.len() as f64).floor() as usize;
        if drop == 0 {
            break;
        }
        let keep = inliers.len() - drop;
        if keep < MIN_POINTS {
            return Err(Error::InsufficientPoints { needed: MIN_POINTS, got: keep });
        }
        let conic = fit_ellipse_direct(&inliers)?;
        let mut ranked: Vec<(usize, T)> = inliers
            .iter()
            .enumerate()
            .map(|(i, &p)| (i, conic.eval(p.x, p.y).abs()))
            .collect();
        ranked.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(std::cmp::Ordering::Equal));
        let mut kept: Vec<usize> = ranked[..keep].iter().map(|&(i, _)| i).collect();
        kept.sort_unstable();
        inliers = kept.into_iter().map(|i| inliers[i]).collect();
    }
    conic_to_geometric(&fit_ellipse_direct(&inliers)?)
}
