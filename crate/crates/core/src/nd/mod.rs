//! The normalized-difference layer.
//!
//! For every band pair `(i, j)` with `i < j` the layer emits
//!
//! ```text
//! N_ij = (sp(α_ij)·b_i − sp(β_ij)·b_j) / (sp(α_ij)·b_i + sp(β_ij)·b_j + ε)
//! ```
//!
//! where `sp` is softplus. Outputs are laid out in lexicographic pair order
//! (see [`pair_index`]). With `α = β` the layer reduces to the classical
//! normalized difference `(b_i − b_j) / (b_i + b_j)`, and for nonnegative
//! inputs every output lies in `[−1, 1]` and is unchanged (up to `ε`) when
//! all bands are scaled by a common factor.
//!
//! Three forward forms are provided:
//!
//! - [`nd_forward`]: the reflectance form; rejects negative inputs.
//! - [`nd_forward_signed`]: replaces `b` in the denominator with
//!   `√(b² + ε)` so any finite input is accepted.
//! - [`nd_forward_softplus_inputs`]: feeds `softplus(b)` through the
//!   reflectance form.
//!
//! Each has a matching backward pass that returns parameter gradients and
//! input gradients accumulated over all `n − 1` pairs touching a band.

mod attention;
mod layer;
mod pairs;
mod signed;

pub use attention::{attention_backward, attention_gate, AttentionGate, GateCache, GateGradients};
pub use layer::{nd_backward, nd_forward, NdCache, NdGradients, NdParams, PairCache};
pub use pairs::{pair_count, pair_index, PairIndexer};
pub use signed::{
    nd_backward_signed, nd_backward_softplus_inputs, nd_forward_signed,
    nd_forward_softplus_inputs, SignedNdCache, SignedPairCache, SoftplusNdCache,
};

use alloc::vec::Vec;

use crate::{Error, Result};

/// Stability constant `ε` added to every denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "f64", into = "f64"))]
pub struct Epsilon(f64);

impl Epsilon {
    pub const DEFAULT: f64 = 1e-8;

    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps > 0.0 {
            Ok(Self(eps))
        } else {
            Err(Error::InvalidConfig(alloc::format!(
                "epsilon must be positive and finite, got {eps}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Epsilon {
    fn default() -> Self {
        Self(Self::DEFAULT)
    }
}

impl TryFrom<f64> for Epsilon {
    type Error = Error;

    fn try_from(eps: f64) -> Result<Self> {
        Self::new(eps)
    }
}

impl From<Epsilon> for f64 {
    fn from(eps: Epsilon) -> f64 {
        eps.0
    }
}

/// Which forward form an ND layer uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// Reflectance form; inputs must be nonnegative.
    #[default]
    Unsigned,
    /// Smooth absolute value `√(b² + ε)` in the denominator.
    SmoothAbs,
    /// Softplus applied to the inputs before the reflectance form.
    SoftplusInputs,
}

/// Cache produced by [`forward_variant`].
#[derive(Debug, Clone)]
pub enum VariantCache {
    Unsigned(NdCache),
    SmoothAbs(SignedNdCache),
    SoftplusInputs(SoftplusNdCache),
}

/// Dispatches to the forward pass of `variant`.
pub fn forward_variant(
    variant: Variant,
    bands: &[f64],
    params: &NdParams,
    eps: Epsilon,
) -> Result<(Vec<f64>, VariantCache)> {
    Ok(match variant {
        Variant::Unsigned => {
            let (out, cache) = nd_forward(bands, params, eps)?;
            (out, VariantCache::Unsigned(cache))
        }
        Variant::SmoothAbs => {
            let (out, cache) = nd_forward_signed(bands, params, eps)?;
            (out, VariantCache::SmoothAbs(cache))
        }
        Variant::SoftplusInputs => {
            let (out, cache) = nd_forward_softplus_inputs(bands, params, eps)?;
            (out, VariantCache::SoftplusInputs(cache))
        }
    })
}

/// Backward pass matching whichever variant produced `cache`.
pub fn backward_variant(
    cache: &VariantCache,
    upstream: &[f64],
    params: &NdParams,
    eps: Epsilon,
) -> Result<NdGradients> {
    match cache {
        VariantCache::Unsigned(c) => nd_backward(c, upstream, params, eps),
        VariantCache::SmoothAbs(c) => nd_backward_signed(c, upstream, params, eps),
        VariantCache::SoftplusInputs(c) => nd_backward_softplus_inputs(c, upstream, params, eps),
    }
}

pub(crate) fn check_bands(bands: &[f64], n_bands: usize) -> Result<()> {
    if bands.len() != n_bands {
        return Err(Error::DimensionMismatch {
            context: "band vector",
            expected: n_bands,
            found: bands.len(),
        });
    }
    if let Some(index) = crate::math::first_non_finite(bands) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

pub(crate) fn check_upstream(upstream: &[f64], pairs: usize) -> Result<()> {
    if upstream.len() != pairs {
        return Err(Error::DimensionMismatch {
            context: "upstream gradient",
            expected: pairs,
            found: upstream.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_must_be_positive() {
        assert!(Epsilon::new(0.0).is_err());
        assert!(Epsilon::new(-1e-8).is_err());
        assert!(Epsilon::new(f64::NAN).is_err());
        assert_eq!(Epsilon::default().value(), 1e-8);
    }

    #[test]
    fn variants_agree_on_reflectance_inputs() {
        let params = NdParams::zeros(4);
        let eps = Epsilon::new(1e-12).unwrap();
        let bands = [0.4, 0.1, 0.7, 0.25];
        let (a, _) = forward_variant(Variant::Unsigned, &bands, &params, eps).unwrap();
        let (b, _) = forward_variant(Variant::SmoothAbs, &bands, &params, eps).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-6);
        }
    }
}
