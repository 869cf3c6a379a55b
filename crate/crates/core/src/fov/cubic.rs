use crate::scalar::Scalar;

type Mat3<T> = [[T; 3]; 3];

/// Real roots of `x^3 + c2 x^2 + c1 x + c0`, polished with Newton steps.
/// A near-zero discriminant is treated as a repeated root so that matrices
/// with real spectra never lose eigenvalues to rounding.
pub(crate) fn real_cubic_roots<T: Scalar>(c2: T, c1: T, c0: T) -> Vec<T> {
    let three = T::lit(3.0);
    let two = T::lit(2.0);
    let p = c1 - c2 * c2 / three;
    let q = two * c2 * c2 * c2 / T::lit(27.0) - c2 * c1 / three + c0;
    let half_q = q / two;
    let third_p = p / three;
    let disc = half_q * half_q + third_p * third_p * third_p;
    let scale = half_q * half_q + (third_p * third_p * third_p).abs();
    let tol = T::epsilon() * T::lit(64.0) * scale;
    let shift = c2 / three;

    let mut roots = if disc > tol {
        let sq = disc.sqrt();
        vec![(-half_q + sq).cbrt() + (-half_q - sq).cbrt()]
    } else if disc >= -tol {
        let u = (-half_q).cbrt();
        vec![two * u, -u, -u]
    } else {
        let r = (-third_p).sqrt();
        let cos_phi = (-half_q / (r * r * r)).max(-T::one()).min(T::one());
        let phi = cos_phi.acos();
        let tau = T::lit(std::f64::consts::TAU);
        (0..3)
            .map(|k| two * r * ((phi + tau * T::lit(k as f64)) / three).cos())
            .collect()
    };
    for t in roots.iter_mut() {
        *t = *t - shift;
        for _ in 0..3 {
            let f = ((*t + c2) * *t + c1) * *t + c0;
            let df = (three * *t + two * c2) * *t + c1;
            if df == T::zero() {
                break;
            }
            let step = f / df;
            if !step.is_finite() {
                break;
            }
            *t = *t - step;
        }
    }
    roots
}

fn cross<T: Scalar>(u: [T; 3], v: [T; 3]) -> [T; 3] {
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

fn norm2<T: Scalar>(v: [T; 3]) -> T {
    v.iter().map(|&x| x * x).sum()
}

/// Real eigenpairs of a general 3x3 matrix. Eigenvectors come from the
/// largest cross product of two rows of `M - lambda I`; eigenvalues whose
/// null space is not one-dimensional are skipped.
pub(crate) fn real_eigenpairs<T: Scalar>(m: &Mat3<T>) -> Vec<(T, [T; 3])> {
    let scale = m.iter().flatten().fold(T::zero(), |acc, &x| acc.max(x.abs()));
    if !(scale > T::zero()) {
        return Vec::new();
    }
    let a: Mat3<T> = m.map(|row| row.map(|x| x / scale));
    let trace = a[0][0] + a[1][1] + a[2][2];
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0]
        + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = det3(&a);
    let mut out = Vec::new();
    for lambda in real_cubic_roots(-trace, minors, -det) {
        let mut n = a;
        for (i, row) in n.iter_mut().enumerate() {
            row[i] -= lambda;
        }
        let candidates = [cross(n[0], n[1]), cross(n[0], n[2]), cross(n[1], n[2])];
        let best = candidates
            .iter()
            .copied()
            .max_by(|u, v| norm2(*u).partial_cmp(&norm2(*v)).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap();
        let len = norm2(best).sqrt();
        if len > T::epsilon() * T::lit(16.0) {
            out.push((lambda * scale, best.map(|x| x / len)));
        }
    }
    out
}

pub(crate) fn det3<T: Scalar>(a: &Mat3<T>) -> T {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Inverse by adjugate. Returns `None` when the determinant is negligible
/// relative to the product of the row norms.
pub(crate) fn inverse3<T: Scalar>(a: &Mat3<T>) -> Option<Mat3<T>> {
    let det = det3(a);
    let row_scale = a.iter().map(|r| norm2(*r).sqrt()).fold(T::one(), |acc, n| acc * n);
    if !(det.abs() > T::epsilon() * T::lit(1e3) * row_scale) {
        return None;
    }
    let mut inv = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]) / det;
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_three_real_roots() {
        // (x-1)(x-2)(x+3) = x^3 - 7x + 6
        let mut r = real_cubic_roots(0.0f64, -7.0, 6.0);
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn cubic_single_real_root() {
        // (x-2)(x^2+1)
        let r = real_cubic_roots(-2.0f64, 1.0, -2.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eigenpairs_of_diagonal_like_matrix() {
        let m = [[2.0f64, 1.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, -1.0]];
        let pairs = real_eigenpairs(&m);
        assert_eq!(pairs.len(), 3);
        for (l, v) in pairs {
            for i in 0..3 {
                let mv: f64 = (0..3).map(|j| m[i][j] * v[j]).sum();
                assert!((mv - l * v[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let m = [[4.0f64, 1.0, 2.0], [0.5, 3.0, 0.0], [1.0, -1.0, 5.0]];
        let inv = inverse3(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| m[i][k] * inv[k][j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        assert!(inverse3(&[[1.0f64, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]]).is_none());
    }
}
