use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::layers::{axpy, conv3x3_backward, conv3x3_forward, dot, maxpool2_backward, maxpool2_forward, softmax};
use super::params::{Params, Tensor};
use super::{Pooling, CLASSES, INPUT_CHANNELS};
use crate::error::{Error, Result};
use crate::imaging::FundusImage;
use crate::scalar::Scalar;

/// Forward-pass mode. In training mode sample `j` of a batch draws its
/// dropout mask from stream `j` of `dropout_seed`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Eval,
    Train { dropout_seed: u64 },
}

/// Channel-major input vector, each 8-bit value mapped to `v / 255 - 0.5`.
pub fn image_to_input<T: Scalar>(img: &FundusImage) -> Vec<T> {
    let plane = img.width() * img.height();
    let mut out = vec![T::zero(); INPUT_CHANNELS * plane];
    let scale = T::lit(1.0 / 255.0);
    for (i, px) in img.pixels().iter().enumerate() {
        for c in 0..INPUT_CHANNELS {
            out[c * plane + i] = T::from_u8(px[c]).unwrap() * scale - T::lit(0.5);
        }
    }
    out
}

struct BlockCache<T> {
    input: Vec<T>,
    activation: Vec<T>,
    argmax: Vec<u32>,
    c_in: usize,
    size: usize,
}

struct SampleCache<T> {
    blocks: Vec<BlockCache<T>>,
    flat: Vec<T>,
    pre_hidden: Vec<T>,
    hidden: Vec<T>,
    mask: Vec<T>,
    probs: [T; CLASSES],
}

fn check_input<T: Scalar>(params: &Params<T>, input: &[T]) -> Result<()> {
    let s = params.spec.input_size;
    let want = INPUT_CHANNELS * s * s;
    if input.len() != want {
        return Err(Error::ShapeMismatch(format!("input has {} values, model expects {want}", input.len())));
    }
    Ok(())
}

fn dropout_mask<T: Scalar>(n: usize, p: f64, mode: Mode, sample: usize) -> Vec<T> {
    match mode {
        Mode::Train { dropout_seed } if p > 0.0 => {
            let mut rng = ChaCha8Rng::seed_from_u64(dropout_seed);
            rng.set_stream(sample as u64);
            let keep = T::lit(1.0 / (1.0 - p));
            (0..n).map(|_| if rng.random::<f64>() < p { T::zero() } else { keep }).collect()
        }
        _ => vec![T::one(); n],
    }
}

fn forward_sample<T: Scalar>(params: &Params<T>, input: &[T], mode: Mode, sample: usize) -> SampleCache<T> {
    let spec = &params.spec;
    let mut x = input.to_vec();
    let mut c_in = INPUT_CHANNELS;
    let mut size = spec.input_size;
    let mut blocks = Vec::with_capacity(spec.conv_channels.len());
    for (b, &c_out) in spec.conv_channels.iter().enumerate() {
        let (w, bias) = params.conv(b);
        let mut act = conv3x3_forward(&x, c_in, size, &w.data, &bias.data);
        act.iter_mut().for_each(|v| *v = v.max(T::zero()));
        let (pooled, argmax) = maxpool2_forward(&act, c_out, size);
        blocks.push(BlockCache { input: std::mem::replace(&mut x, pooled), activation: act, argmax, c_in, size });
        c_in = c_out;
        size /= 2;
    }
    let flat = match spec.pooling {
        Pooling::Flatten => x,
        Pooling::GlobalAverage => {
            let plane = size * size;
            let inv = T::one() / T::from_usize(plane).unwrap();
            x.chunks_exact(plane).map(|ch| ch.iter().copied().sum::<T>() * inv).collect()
        }
    };

    let (w1, b1) = params.dense(0);
    let pre_hidden: Vec<T> = w1
        .data
        .chunks_exact(flat.len())
        .zip(&b1.data)
        .map(|(row, &b)| b + dot(row, &flat))
        .collect();
    let mask = dropout_mask(pre_hidden.len(), spec.dropout, mode, sample);
    let hidden: Vec<T> = pre_hidden.iter().zip(&mask).map(|(&z, &m)| z.max(T::zero()) * m).collect();

    let (w2, b2) = params.dense(1);
    let logits: Vec<T> = w2
        .data
        .chunks_exact(hidden.len())
        .zip(&b2.data)
        .map(|(row, &b)| b + dot(row, &hidden))
        .collect();
    let p = softmax(&logits);
    SampleCache { blocks, flat, pre_hidden, hidden, mask, probs: [p[0], p[1]] }
}

/// Class probabilities for each input.
pub fn forward<T: Scalar>(params: &Params<T>, inputs: &[Vec<T>], mode: Mode) -> Result<Vec<[T; CLASSES]>> {
    params.check_shapes()?;
    inputs.iter().try_for_each(|x| check_input(params, x))?;
    Ok(inputs
        .par_iter()
        .enumerate()
        .map(|(j, x)| forward_sample(params, x, mode, j).probs)
        .collect())
}

/// Output of the dense hidden layer after ReLU and (in training mode)
/// dropout, i.e. the input of the final classifier layer.
pub fn penultimate<T: Scalar>(params: &Params<T>, input: &[T], mode: Mode) -> Result<Vec<T>> {
    params.check_shapes()?;
    check_input(params, input)?;
    Ok(forward_sample(params, input, mode, 0).hidden)
}

/// Probability of the positive class for a preprocessed image.
pub fn predict<T: Scalar>(params: &Params<T>, img: &FundusImage) -> Result<f64> {
    let s = params.spec.input_size;
    if img.width() != s || img.height() != s {
        return Err(Error::ShapeMismatch(format!(
            "image is {}x{}, model expects {s}x{s}",
            img.width(),
            img.height()
        )));
    }
    let probs = forward(params, &[image_to_input(img)], Mode::Eval)?;
    Ok(probs[0][1].as_f64())
}

const PROB_FLOOR: f64 = 1e-12;

/// Mean negative log-likelihood of the true class.
pub fn loss_cross_entropy<T: Scalar>(probs: &[[T; CLASSES]], labels: &[u8]) -> Result<T> {
    if probs.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!("{} predictions for {} labels", probs.len(), labels.len())));
    }
    if probs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let floor = T::lit(PROB_FLOOR);
    let mut total = T::zero();
    for (p, &l) in probs.iter().zip(labels) {
        if l as usize >= CLASSES {
            return Err(Error::InvalidLabel(l as i64));
        }
        total -= p[l as usize].max(floor).ln();
    }
    Ok(total / T::from_usize(labels.len()).unwrap())
}

/// Batch gradients of the mean cross-entropy, with the loss and the
/// forward-pass probabilities they were computed from.
#[derive(Clone, Debug)]
pub struct Gradients<T> {
    pub tensors: Vec<Tensor<T>>,
    pub loss: T,
    pub probs: Vec<[T; CLASSES]>,
}

fn backward_sample<T: Scalar>(params: &Params<T>, cache: &SampleCache<T>, label: u8, scale: T, grads: &mut [Tensor<T>]) {
    let n_blocks = params.spec.conv_channels.len();
    let d_logits: Vec<T> = (0..CLASSES)
        .map(|k| (cache.probs[k] - if k == label as usize { T::one() } else { T::zero() }) * scale)
        .collect();

    let (w2, _) = params.dense(1);
    let hidden_len = cache.hidden.len();
    let mut d_hidden = vec![T::zero(); hidden_len];
    {
        let (dw2, rest) = grads[2 * n_blocks + 2..].split_at_mut(1);
        for (k, &g) in d_logits.iter().enumerate() {
            axpy(g, &cache.hidden, &mut dw2[0].data[k * hidden_len..(k + 1) * hidden_len]);
            rest[0].data[k] += g;
            axpy(g, &w2.data[k * hidden_len..(k + 1) * hidden_len], &mut d_hidden);
        }
    }

    let (w1, _) = params.dense(0);
    let flat_len = cache.flat.len();
    let mut d_flat = vec![T::zero(); flat_len];
    {
        let (dw1, rest) = grads[2 * n_blocks..].split_at_mut(1);
        for j in 0..hidden_len {
            if !(cache.pre_hidden[j] > T::zero()) || cache.mask[j] == T::zero() {
                continue;
            }
            let g = d_hidden[j] * cache.mask[j];
            if g == T::zero() {
                continue;
            }
            axpy(g, &cache.flat, &mut dw1[0].data[j * flat_len..(j + 1) * flat_len]);
            rest[0].data[j] += g;
            if n_blocks > 0 {
                axpy(g, &w1.data[j * flat_len..(j + 1) * flat_len], &mut d_flat);
            }
        }
    }

    let mut d_x = match params.spec.pooling {
        Pooling::Flatten => d_flat,
        Pooling::GlobalAverage => {
            let plane = params.spec.feature_size().pow(2);
            let inv = T::one() / T::from_usize(plane).unwrap();
            d_flat.iter().flat_map(|&g| std::iter::repeat_n(g * inv, plane)).collect()
        }
    };
    for b in (0..n_blocks).rev() {
        let blk = &cache.blocks[b];
        let mut d_act = maxpool2_backward(&d_x, &blk.argmax, blk.activation.len());
        for (d, &a) in d_act.iter_mut().zip(&blk.activation) {
            if !(a > T::zero()) {
                *d = T::zero();
            }
        }
        let (w, _) = params.conv(b);
        let mut d_input = if b > 0 { Some(vec![T::zero(); blk.input.len()]) } else { None };
        let (dw, db) = grads[2 * b..2 * b + 2].split_at_mut(1);
        conv3x3_backward(
            &blk.input,
            blk.c_in,
            blk.size,
            &w.data,
            &d_act,
            &mut dw[0].data,
            &mut db[0].data,
            d_input.as_deref_mut(),
        );
        if let Some(d) = d_input {
            d_x = d;
        }
    }
}

/// Samples per gradient accumulation chunk. Chunks are reduced in order, so
/// results do not depend on the number of worker threads.
const CHUNK: usize = 8;

/// Exact gradients of the mean cross-entropy over the batch. Dropout masks
/// match those of `forward` with `Mode::Train { dropout_seed }`.
pub fn gradients<T: Scalar>(params: &Params<T>, inputs: &[Vec<T>], labels: &[u8], dropout_seed: u64) -> Result<Gradients<T>> {
    params.check_shapes()?;
    if inputs.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!("{} inputs for {} labels", inputs.len(), labels.len())));
    }
    if inputs.is_empty() {
        return Err(Error::EmptyInput);
    }
    inputs.iter().try_for_each(|x| check_input(params, x))?;
    if let Some(&l) = labels.iter().find(|&&l| l as usize >= CLASSES) {
        return Err(Error::InvalidLabel(l as i64));
    }
    let mode = Mode::Train { dropout_seed };
    let scale = T::one() / T::from_usize(inputs.len()).unwrap();
    let zeros = || params.tensors.iter().map(|t| Tensor::zeros(&t.shape)).collect::<Vec<_>>();

    let partials: Vec<(Vec<Tensor<T>>, Vec<[T; CLASSES]>)> = inputs
        .par_chunks(CHUNK)
        .zip(labels.par_chunks(CHUNK))
        .enumerate()
        .map(|(c, (xs, ls))| {
            let mut acc = zeros();
            let mut probs = Vec::with_capacity(xs.len());
            for (k, (x, &l)) in xs.iter().zip(ls).enumerate() {
                let cache = forward_sample(params, x, mode, c * CHUNK + k);
                backward_sample(params, &cache, l, scale, &mut acc);
                probs.push(cache.probs);
            }
            (acc, probs)
        })
        .collect();

    let mut iter = partials.into_iter();
    let (mut total, mut probs) = iter.next().expect("nonempty batch");
    for (part, p) in iter {
        for (t, g) in total.iter_mut().zip(part) {
            axpy(T::one(), &g.data, &mut t.data);
        }
        probs.extend(p);
    }
    let loss = loss_cross_entropy(&probs, labels)?;
    Ok(Gradients { tensors: total, loss, probs })
}
