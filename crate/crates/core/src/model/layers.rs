use crate::scalar::Scalar;

/// Dot product with eight independent accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 8];
    let chunks = a.len() / 8 * 8;
    for (ca, cb) in a[..chunks].chunks_exact(8).zip(b[..chunks].chunks_exact(8)) {
        for k in 0..8 {
            acc[k] += ca[k] * cb[k];
        }
    }
    let mut tail = T::zero();
    for (&x, &y) in a[chunks..].iter().zip(&b[chunks..]) {
        tail += x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Valid output columns and matching input offset for kernel column `k` of
/// a same-padded 3-tap filter over a row of width `w`.
#[inline]
fn tap_range(k: usize, w: usize) -> (usize, usize, usize) {
    match k {
        0 => (1, w, 0),
        1 => (0, w, 0),
        _ => (0, w - 1, 1),
    }
}

/// 3x3 convolution, stride 1, zero padding 1, on a `c_in x s x s` input.
pub(crate) fn conv3x3_forward<T: Scalar>(input: &[T], c_in: usize, s: usize, weight: &[T], bias: &[T]) -> Vec<T> {
    let c_out = bias.len();
    let plane = s * s;
    let mut out = vec![T::zero(); c_out * plane];
    for (oc, out_plane) in out.chunks_exact_mut(plane).enumerate() {
        out_plane.iter_mut().for_each(|v| *v = bias[oc]);
        for ic in 0..c_in {
            let in_plane = &input[ic * plane..(ic + 1) * plane];
            let kernel = &weight[(oc * c_in + ic) * 9..(oc * c_in + ic + 1) * 9];
            for ky in 0..3 {
                for kx in 0..3 {
                    let wv = kernel[ky * 3 + kx];
                    let (x0, x1, sx0) = tap_range(kx, s);
                    if x1 <= x0 {
                        continue;
                    }
                    for y in 0..s {
                        let sy = y + ky;
                        if sy == 0 || sy > s {
                            continue;
                        }
                        let in_row = &in_plane[(sy - 1) * s + sx0..(sy - 1) * s + sx0 + (x1 - x0)];
                        axpy(wv, in_row, &mut out_plane[y * s + x0..y * s + x1]);
                    }
                }
            }
        }
    }
    out
}

/// Accumulates weight and bias gradients and, when `d_input` is given, the
/// input gradient of [`conv3x3_forward`].
pub(crate) fn conv3x3_backward<T: Scalar>(
    input: &[T],
    c_in: usize,
    s: usize,
    weight: &[T],
    d_out: &[T],
    d_weight: &mut [T],
    d_bias: &mut [T],
    mut d_input: Option<&mut [T]>,
) {
    let plane = s * s;
    for (oc, g_plane) in d_out.chunks_exact(plane).enumerate() {
        if g_plane.iter().all(|&g| g == T::zero()) {
            continue;
        }
        d_bias[oc] += g_plane.iter().copied().sum::<T>();
        for ic in 0..c_in {
            let in_plane = &input[ic * plane..(ic + 1) * plane];
            let base = (oc * c_in + ic) * 9;
            for ky in 0..3 {
                for kx in 0..3 {
                    let (x0, x1, sx0) = tap_range(kx, s);
                    if x1 <= x0 {
                        continue;
                    }
                    let width = x1 - x0;
                    let wv = weight[base + ky * 3 + kx];
                    let mut acc = T::zero();
                    for y in 0..s {
                        let sy = y + ky;
                        if sy == 0 || sy > s {
                            continue;
                        }
                        let g_row = &g_plane[y * s + x0..y * s + x1];
                        let in_start = (sy - 1) * s + sx0;
                        acc += dot(g_row, &in_plane[in_start..in_start + width]);
                        if let Some(d_in) = d_input.as_deref_mut() {
                            let start = ic * plane + in_start;
                            axpy(wv, g_row, &mut d_in[start..start + width]);
                        }
                    }
                    d_weight[base + ky * 3 + kx] += acc;
                }
            }
        }
    }
}

/// 2x2 max pooling with stride 2 (odd trailing rows/columns dropped).
/// Returns the pooled planes and the flat input index of each maximum.
pub(crate) fn maxpool2_forward<T: Scalar>(input: &[T], c: usize, s: usize) -> (Vec<T>, Vec<u32>) {
    let so = s / 2;
    let mut out = Vec::with_capacity(c * so * so);
    let mut arg = Vec::with_capacity(c * so * so);
    for ch in 0..c {
        let base = ch * s * s;
        for y in 0..so {
            for x in 0..so {
                let mut best = base + 2 * y * s + 2 * x;
                for idx in [best + 1, best + s, best + s + 1] {
                    if input[idx] > input[best] {
                        best = idx;
                    }
                }
                out.push(input[best]);
                arg.push(best as u32);
            }
        }
    }
    (out, arg)
}

pub(crate) fn maxpool2_backward<T: Scalar>(d_out: &[T], argmax: &[u32], input_len: usize) -> Vec<T> {
    let mut d_in = vec![T::zero(); input_len];
    for (&g, &i) in d_out.iter().zip(argmax) {
        d_in[i as usize] += g;
    }
    d_in
}

/// Numerically stable softmax (the maximum logit is subtracted first).
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}
