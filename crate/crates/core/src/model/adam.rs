use super::params::{Params, Tensor};
use super::TrainConfig;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// First and second moment estimates for every parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    pub m: Vec<Tensor<T>>,
    pub v: Vec<Tensor<T>>,
    pub t: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(params: &Params<T>) -> Self {
        let zeros = || params.tensors.iter().map(|t| Tensor::zeros(&t.shape)).collect();
        Self { m: zeros(), v: zeros(), t: 0 }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step<T: Scalar>(
    params: &mut Params<T>,
    grads: &[Tensor<T>],
    state: &mut AdamState<T>,
    cfg: &TrainConfig,
) -> Result<()> {
    let shapes_agree = grads.len() == params.tensors.len()
        && state.m.len() == params.tensors.len()
        && params
            .tensors
            .iter()
            .zip(grads)
            .zip(&state.m)
            .all(|((p, g), m)| p.shape == g.shape && p.shape == m.shape);
    if !shapes_agree {
        return Err(Error::ShapeMismatch("gradient or optimizer state does not match parameters".into()));
    }
    state.t += 1;
    let t = state.t as i32;
    let (b1, b2) = (T::lit(cfg.adam_beta1), T::lit(cfg.adam_beta2));
    let bias1 = T::lit(1.0 - cfg.adam_beta1.powi(t));
    let bias2 = T::lit(1.0 - cfg.adam_beta2.powi(t));
    let lr = T::lit(cfg.learning_rate);
    let eps = T::lit(cfg.adam_eps);
    let one = T::one();
    for (((p, g), m), v) in params.tensors.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        for (((w, &gi), mi), vi) in p.data.iter_mut().zip(&g.data).zip(&mut m.data).zip(&mut v.data) {
            *mi = b1 * *mi + (one - b1) * gi;
            *vi = b2 * *vi + (one - b2) * gi * gi;
            let m_hat = *mi / bias1;
            let v_hat = *vi / bias2;
            *w -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelSpec, Pooling};

    fn tiny_params() -> Params<f64> {
        let spec = ModelSpec { input_size: 2, conv_channels: vec![], pooling: Pooling::Flatten, hidden: 2, dropout: 0.0 };
        let mut p = Params::<f64>::zeros(&spec).unwrap();
        for t in &mut p.tensors {
            t.data.iter_mut().enumerate().for_each(|(i, x)| *x = i as f64 * 0.25);
        }
        p
    }

    fn filled_like(p: &Params<f64>, v: f64) -> Vec<Tensor<f64>> {
        p.tensors.iter().map(|t| Tensor { shape: t.shape.clone(), data: vec![v; t.len()] }).collect()
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = tiny_params();
        let start = p.clone();
        let mut state = AdamState::new(&p);
        let mut grads = filled_like(&p, 0.0);
        grads[0].data[0] = 3.0;
        grads[0].data[1] = -0.02;
        adam_step(&mut p, &grads, &mut state, &TrainConfig::default()).unwrap();
        let d0 = p.tensors[0].data[0] - start.tensors[0].data[0];
        let d1 = p.tensors[0].data[1] - start.tensors[0].data[1];
        assert!((d0 + 1e-3).abs() < 1e-9);
        assert!((d1 - 1e-3).abs() < 1e-9);
        assert_eq!(p.tensors[1], start.tensors[1]);
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut p = tiny_params();
        let start = p.clone();
        let mut state = AdamState::new(&p);
        let grads = filled_like(&p, 0.0);
        for _ in 0..25 {
            adam_step(&mut p, &grads, &mut state, &TrainConfig::default()).unwrap();
        }
        assert_eq!(p, start);
        assert_eq!(state.t, 25);
    }

    #[test]
    fn two_steps_with_unit_gradient() {
        let cfg = TrainConfig::default();
        let mut p = tiny_params();
        let start = p.clone();
        let mut state = AdamState::new(&p);
        let grads = filled_like(&p, 1.0);
        adam_step(&mut p, &grads, &mut state, &cfg).unwrap();
        adam_step(&mut p, &grads, &mut state, &cfg).unwrap();

        // Hand iteration of the recurrences for g = 1.
        let (b1, b2, lr, eps) = (0.9f64, 0.999f64, 1e-3, 1e-8);
        let (mut m, mut v, mut theta) = (0.0, 0.0, start.tensors[0].data[3]);
        for t in 1..=2 {
            m = b1 * m + (1.0 - b1);
            v = b2 * v + (1.0 - b2);
            theta -= lr * (m / (1.0 - b1.powi(t))) / ((v / (1.0 - b2.powi(t))).sqrt() + eps);
        }
        assert!((p.tensors[0].data[3] - theta).abs() < 1e-12);
        assert!((theta - (start.tensors[0].data[3] - 2.0 * lr / (1.0 + eps))).abs() < 1e-12);
        assert!((state.m[0].data[0] - 0.19).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        let mut p = tiny_params();
        let mut state = AdamState::new(&p);
        let grads = filled_like(&p, 1.0)[1..].to_vec();
        assert!(adam_step(&mut p, &grads, &mut state, &TrainConfig::default()).is_err());
    }
}
