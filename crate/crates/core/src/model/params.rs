use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ModelSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    pub shape: Vec<usize>,
    pub data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(shape: &[usize]) -> Self {
        Self { shape: shape.to_vec(), data: vec![T::zero(); shape.iter().product()] }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor { shape: self.shape.clone(), data: self.data.iter().map(|&x| U::lit(x.as_f64())).collect() }
    }
}

/// All learnable tensors of a model, in [`ModelSpec::tensor_shapes`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct Params<T> {
    pub spec: ModelSpec,
    pub tensors: Vec<Tensor<T>>,
}

impl<T: Scalar> Params<T> {
    pub fn zeros(spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec: spec.clone(), tensors: spec.tensor_shapes().iter().map(|s| Tensor::zeros(s)).collect() })
    }

    /// Uniform fan-in scaled weights (`U(-sqrt(6/fan_in), sqrt(6/fan_in))`)
    /// and zero biases. Each tensor draws from its own stream of `seed`.
    pub fn init(spec: &ModelSpec, seed: u64) -> Result<Self> {
        let mut params = Self::zeros(spec)?;
        for (i, t) in params.tensors.iter_mut().enumerate() {
            if t.shape.len() == 1 {
                continue;
            }
            let fan_in: usize = t.shape[1..].iter().product();
            let limit = (6.0 / fan_in as f64).sqrt();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            for w in t.data.iter_mut() {
                *w = T::lit(rng.random_range(-limit..limit));
            }
        }
        Ok(params)
    }

    /// Zeroes the output layer so every input maps to probability 1/2.
    pub fn zero_head(&mut self) {
        let n = self.tensors.len();
        for t in &mut self.tensors[n - 2..] {
            t.data.iter_mut().for_each(|x| *x = T::zero());
        }
    }

    pub fn cast<U: Scalar>(&self) -> Params<U> {
        Params { spec: self.spec.clone(), tensors: self.tensors.iter().map(Tensor::cast).collect() }
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub(crate) fn check_shapes(&self) -> Result<()> {
        let want = self.spec.tensor_shapes();
        if want.len() != self.tensors.len() || want.iter().zip(&self.tensors).any(|(s, t)| *s != t.shape) {
            return Err(Error::ShapeMismatch("tensors do not match the model spec".into()));
        }
        Ok(())
    }

    pub(crate) fn conv(&self, block: usize) -> (&Tensor<T>, &Tensor<T>) {
        (&self.tensors[2 * block], &self.tensors[2 * block + 1])
    }

    pub(crate) fn dense(&self, layer: usize) -> (&Tensor<T>, &Tensor<T>) {
        let base = 2 * self.spec.conv_channels.len() + 2 * layer;
        (&self.tensors[base], &self.tensors[base + 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Pooling;

    fn tiny() -> ModelSpec {
        ModelSpec { input_size: 8, conv_channels: vec![2], pooling: Pooling::Flatten, hidden: 4, dropout: 0.5 }
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = Params::<f32>::init(&tiny(), 1).unwrap();
        let b = Params::<f32>::init(&tiny(), 1).unwrap();
        let c = Params::<f32>::init(&tiny(), 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let limit = (6.0f32 / 27.0).sqrt();
        assert!(a.tensors[0].data.iter().all(|w| w.abs() <= limit));
        assert!(a.tensors[1].data.iter().all(|&b| b == 0.0));
        a.check_shapes().unwrap();
    }

    #[test]
    fn zero_head_clears_output_layer() {
        let mut p = Params::<f64>::init(&tiny(), 3).unwrap();
        p.zero_head();
        let (w, b) = p.dense(1);
        assert!(w.data.iter().chain(&b.data).all(|&x| x == 0.0));
        assert!(p.dense(0).0.data.iter().any(|&x| x != 0.0));
    }
}
