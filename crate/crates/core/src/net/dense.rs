use alloc::vec::Vec;

use rand::distr::{Distribution, Uniform};
use rand::Rng;

use crate::math::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    /// Derivative at `z`; ReLU uses 0 at exactly 0.
    #[inline]
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Affine map followed by an activation: `y = act(W x + b)`.
///
/// `W` is `out × in`, row-major.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DenseLayer {
    weights: Matrix,
    bias: Vec<f64>,
    activation: Activation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseCache {
    pub input: Vec<f64>,
    pub preact: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGradients {
    /// Row-major, same shape as the weights.
    pub d_weights: Vec<f64>,
    pub d_bias: Vec<f64>,
    pub d_input: Vec<f64>,
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::DimensionMismatch {
                context: "dense bias",
                expected: weights.rows(),
                found: bias.len(),
            });
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    /// Weights and biases drawn uniformly from `±1/√fan_in`.
    pub fn init_uniform<R: Rng + ?Sized>(
        fan_in: usize,
        fan_out: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if fan_in == 0 || fan_out == 0 {
            return Err(Error::InvalidConfig("dense layer dimensions must be positive".into()));
        }
        let limit = 1.0 / libm::sqrt(fan_in as f64);
        let dist = Uniform::new_inclusive(-limit, limit)
            .map_err(|_| Error::InvalidConfig("bad init range".into()))?;
        let weights: Vec<f64> = (0..fan_in * fan_out).map(|_| dist.sample(rng)).collect();
        let bias = (0..fan_out).map(|_| dist.sample(rng)).collect();
        Self::new(Matrix::from_row_major(fan_out, fan_in, weights)?, bias, activation)
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        self.weights.as_mut_slice()
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub(crate) fn split_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (self.weights.as_mut_slice(), &mut self.bias)
    }

    pub fn param_count(&self) -> usize {
        self.weights.as_slice().len() + self.bias.len()
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, DenseCache)> {
        let mut preact = self.weights.matvec(input)?;
        for (z, b) in preact.iter_mut().zip(&self.bias) {
            *z += b;
        }
        let output = preact.iter().map(|&z| self.activation.apply(z)).collect();
        Ok((
            output,
            DenseCache {
                input: input.to_vec(),
                preact,
            },
        ))
    }

    pub fn backward(&self, cache: &DenseCache, upstream: &[f64]) -> Result<DenseGradients> {
        if upstream.len() != self.out_dim() || cache.preact.len() != self.out_dim() {
            return Err(Error::DimensionMismatch {
                context: "dense upstream",
                expected: self.out_dim(),
                found: upstream.len(),
            });
        }
        if cache.input.len() != self.in_dim() {
            return Err(Error::DimensionMismatch {
                context: "dense cache input",
                expected: self.in_dim(),
                found: cache.input.len(),
            });
        }
        let d_bias: Vec<f64> = upstream
            .iter()
            .zip(&cache.preact)
            .map(|(g, &z)| g * self.activation.derivative(z))
            .collect();
        let mut d_weights = Vec::with_capacity(self.out_dim() * self.in_dim());
        for &dz in &d_bias {
            d_weights.extend(cache.input.iter().map(|x| dz * x));
        }
        let d_input = self.weights.matvec_transposed(&d_bias)?;
        Ok(DenseGradients {
            d_weights,
            d_bias,
            d_input,
        })
    }
}

pub fn dense_forward(layer: &DenseLayer, input: &[f64]) -> Result<(Vec<f64>, DenseCache)> {
    layer.forward(input)
}

pub fn dense_backward(layer: &DenseLayer, cache: &DenseCache, upstream: &[f64]) -> Result<DenseGradients> {
    layer.backward(cache, upstream)
}
