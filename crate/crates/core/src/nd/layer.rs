use alloc::vec;
use alloc::vec::Vec;

use super::{check_bands, check_upstream, pair_count, Epsilon};
use crate::math::{sigmoid, softplus};
use crate::{Error, Result};

/// Learnable coupling coefficients `(α_ij, β_ij)`, one entry per pair in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NdParams {
    n_bands: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl NdParams {
    /// `α = β = 0`: every pair starts as the classical normalized difference.
    pub fn zeros(n_bands: usize) -> Self {
        let p = pair_count(n_bands);
        Self {
            n_bands,
            alpha: vec![0.0; p],
            beta: vec![0.0; p],
        }
    }

    pub fn from_parts(n_bands: usize, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if n_bands < 2 {
            return Err(Error::InvalidConfig("an ND layer needs at least two bands".into()));
        }
        let p = pair_count(n_bands);
        for (context, v) in [("alpha", &alpha), ("beta", &beta)] {
            if v.len() != p {
                return Err(Error::DimensionMismatch {
                    context,
                    expected: p,
                    found: v.len(),
                });
            }
            if let Some(index) = crate::math::first_non_finite(v) {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(Self {
            n_bands,
            alpha,
            beta,
        })
    }

    #[inline]
    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    #[inline]
    pub fn n_pairs(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn alpha_mut(&mut self) -> &mut [f64] {
        &mut self.alpha
    }

    pub fn beta_mut(&mut self) -> &mut [f64] {
        &mut self.beta
    }

    /// Returns `(α, β)` mutably at once.
    pub fn split_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.alpha, &mut self.beta)
    }
}

/// Forward quantities kept for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCache {
    pub sigma_alpha: f64,
    pub sigma_beta: f64,
    pub b_i: f64,
    pub b_j: f64,
    /// `σα·b_i + σβ·b_j + ε`.
    pub denom: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NdCache {
    pub(crate) n_bands: usize,
    pub(crate) pairs: Vec<PairCache>,
}

impl NdCache {
    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    pub fn pairs(&self) -> &[PairCache] {
        &self.pairs
    }
}

/// Loss gradients for one ND layer evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct NdGradients {
    pub d_alpha: Vec<f64>,
    pub d_beta: Vec<f64>,
    pub d_input: Vec<f64>,
}

impl NdGradients {
    pub(crate) fn zeros(n_bands: usize, n_pairs: usize) -> Self {
        Self {
            d_alpha: vec![0.0; n_pairs],
            d_beta: vec![0.0; n_pairs],
            d_input: vec![0.0; n_bands],
        }
    }
}

/// Forward pass over nonnegative reflectances.
///
/// Returns one output per pair and the cache consumed by [`nd_backward`].
pub fn nd_forward(bands: &[f64], params: &NdParams, eps: Epsilon) -> Result<(Vec<f64>, NdCache)> {
    check_bands(bands, params.n_bands)?;
    if let Some(index) = bands.iter().position(|&b| b < 0.0) {
        return Err(Error::NegativeInput {
            index,
            value: bands[index],
        });
    }
    Ok(forward_unchecked(bands, params, eps))
}

pub(crate) fn forward_unchecked(bands: &[f64], params: &NdParams, eps: Epsilon) -> (Vec<f64>, NdCache) {
    let n = params.n_bands;
    let eps = eps.value();
    let mut outputs = Vec::with_capacity(params.n_pairs());
    let mut pairs = Vec::with_capacity(params.n_pairs());
    let mut p = 0;
    for i in 0..n {
        for j in i + 1..n {
            let sigma_alpha = softplus(params.alpha[p]);
            let sigma_beta = softplus(params.beta[p]);
            let (b_i, b_j) = (bands[i], bands[j]);
            let numer = sigma_alpha * b_i - sigma_beta * b_j;
            let denom = sigma_alpha * b_i + sigma_beta * b_j + eps;
            outputs.push(numer / denom);
            pairs.push(PairCache {
                sigma_alpha,
                sigma_beta,
                b_i,
                b_j,
                denom,
            });
            p += 1;
        }
    }
    (outputs, NdCache { n_bands: n, pairs })
}

/// Backward pass for [`nd_forward`].
///
/// `upstream[p]` is `∂L/∂N_p`. Input gradients accumulate over every pair
/// that touches a band.
pub fn nd_backward(
    cache: &NdCache,
    upstream: &[f64],
    params: &NdParams,
    eps: Epsilon,
) -> Result<NdGradients> {
    check_upstream(upstream, cache.pairs.len())?;
    if params.n_pairs() != cache.pairs.len() {
        return Err(Error::DimensionMismatch {
            context: "ND parameters vs cache",
            expected: cache.pairs.len(),
            found: params.n_pairs(),
        });
    }
    let n = cache.n_bands;
    let eps = eps.value();
    let mut grads = NdGradients::zeros(n, cache.pairs.len());
    let mut p = 0;
    for i in 0..n {
        for j in i + 1..n {
            let c = &cache.pairs[p];
            let delta = upstream[p];
            let s_alpha = sigmoid(params.alpha[p]);
            let s_beta = sigmoid(params.beta[p]);
            let denom_sq = c.denom * c.denom;
            // B − A and B + A
            let b_minus_a = 2.0 * c.sigma_beta * c.b_j + eps;
            let b_plus_a = 2.0 * c.sigma_alpha * c.b_i + eps;

            grads.d_alpha[p] = delta * (s_alpha * c.b_i * b_minus_a / denom_sq);
            grads.d_beta[p] = delta * (-s_beta * c.b_j * b_plus_a / denom_sq);
            grads.d_input[i] += delta * (c.sigma_alpha * b_minus_a / denom_sq);
            grads.d_input[j] += delta * (-c.sigma_beta * b_plus_a / denom_sq);
            p += 1;
        }
    }
    Ok(grads)
}
