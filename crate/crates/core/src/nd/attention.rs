use alloc::vec::Vec;

use crate::math::{sigmoid, Matrix};
use crate::{Error, Result};

/// Input-dependent gate `q = sigmoid(W b + c)` applied elementwise to the ND
/// outputs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttentionGate {
    /// `n_pairs × n_bands`
    pub weights: Matrix,
    /// One entry per pair.
    pub bias: Vec<f64>,
}

impl AttentionGate {
    pub fn new(weights: Matrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::DimensionMismatch {
                context: "attention bias",
                expected: weights.rows(),
                found: bias.len(),
            });
        }
        Ok(Self { weights, bias })
    }

    pub fn forward(&self, bands: &[f64], nd_outputs: &[f64]) -> Result<(Vec<f64>, GateCache)> {
        attention_gate(bands, &self.weights, &self.bias, nd_outputs)
    }

    pub fn backward(&self, cache: &GateCache, upstream: &[f64]) -> Result<GateGradients> {
        attention_backward(&self.weights, cache, upstream)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateCache {
    pub bands: Vec<f64>,
    pub gate: Vec<f64>,
    pub nd_outputs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateGradients {
    /// Row-major, same shape as the gate weights.
    pub d_weights: Vec<f64>,
    pub d_bias: Vec<f64>,
    pub d_bands: Vec<f64>,
    pub d_nd_outputs: Vec<f64>,
}

/// Returns `q ⊙ nd_outputs` with `q = sigmoid(W·bands + c)`.
pub fn attention_gate(
    bands: &[f64],
    weights: &Matrix,
    bias: &[f64],
    nd_outputs: &[f64],
) -> Result<(Vec<f64>, GateCache)> {
    if bias.len() != weights.rows() || nd_outputs.len() != weights.rows() {
        return Err(Error::DimensionMismatch {
            context: "attention gate rows",
            expected: weights.rows(),
            found: if bias.len() != weights.rows() {
                bias.len()
            } else {
                nd_outputs.len()
            },
        });
    }
    let pre = weights.matvec(bands)?;
    let gate: Vec<f64> = pre.iter().zip(bias).map(|(z, c)| sigmoid(z + c)).collect();
    let out = gate.iter().zip(nd_outputs).map(|(q, n)| q * n).collect();
    Ok((
        out,
        GateCache {
            bands: bands.to_vec(),
            gate,
            nd_outputs: nd_outputs.to_vec(),
        },
    ))
}

/// Backward pass for [`attention_gate`].
pub fn attention_backward(weights: &Matrix, cache: &GateCache, upstream: &[f64]) -> Result<GateGradients> {
    if upstream.len() != cache.gate.len() {
        return Err(Error::DimensionMismatch {
            context: "attention upstream",
            expected: cache.gate.len(),
            found: upstream.len(),
        });
    }
    let d_nd_outputs: Vec<f64> = upstream.iter().zip(&cache.gate).map(|(g, q)| g * q).collect();
    let d_pre: Vec<f64> = upstream
        .iter()
        .zip(&cache.gate)
        .zip(&cache.nd_outputs)
        .map(|((g, q), n)| g * n * q * (1.0 - q))
        .collect();
    let mut d_weights = Vec::with_capacity(weights.rows() * weights.cols());
    for &dz in &d_pre {
        d_weights.extend(cache.bands.iter().map(|b| dz * b));
    }
    let d_bands = weights.matvec_transposed(&d_pre)?;
    Ok(GateGradients {
        d_weights,
        d_bias: d_pre,
        d_bands,
        d_nd_outputs,
    })
}
