use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    /// `false`: L2 term added to the gradient before the moment updates.
    /// `true`: decay applied directly to the parameters (AdamW).
    pub decoupled: bool,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-4,
            decoupled: false,
        }
    }
}

/// First and second moments for a list of parameter groups.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
}

impl AdamState {
    pub fn new(group_sizes: &[usize]) -> Self {
        Self {
            m: group_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: group_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn first_moment(&self) -> &[Vec<f64>] {
        &self.m
    }

    pub fn second_moment(&self) -> &[Vec<f64>] {
        &self.v
    }
}

/// One bias-corrected Adam update over every group.
pub fn adam_step(
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    state: &mut AdamState,
    config: &AdamConfig,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::DimensionMismatch {
            context: "adam groups",
            expected: state.m.len(),
            found: params.len().max(grads.len()),
        });
    }
    for (k, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() || p.len() != state.m[k].len() {
            return Err(Error::DimensionMismatch {
                context: "adam group length",
                expected: state.m[k].len(),
                found: if p.len() != state.m[k].len() { p.len() } else { g.len() },
            });
        }
    }

    state.t += 1;
    let t = state.t as i32;
    let bias1 = 1.0 - libm::pow(config.beta1, f64::from(t));
    let bias2 = 1.0 - libm::pow(config.beta2, f64::from(t));
    let lambda = config.weight_decay;

    for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let (m, v) = (&mut state.m[k], &mut state.v[k]);
        for idx in 0..p.len() {
            let mut grad = g[idx];
            if !config.decoupled {
                grad += lambda * p[idx];
            }
            m[idx] = config.beta1 * m[idx] + (1.0 - config.beta1) * grad;
            v[idx] = config.beta2 * v[idx] + (1.0 - config.beta2) * grad * grad;
            let m_hat = m[idx] / bias1;
            let v_hat = v[idx] / bias2;
            if config.decoupled {
                p[idx] -= config.lr * lambda * p[idx];
            }
            p[idx] -= config.lr * m_hat / (libm::sqrt(v_hat) + config.eps);
        }
    }
    Ok(())
}
