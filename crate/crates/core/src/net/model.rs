use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dense::{Activation, DenseCache, DenseLayer};
use crate::math::Matrix;
use crate::nd::{
    backward_variant, forward_variant, pair_count, AttentionGate, Epsilon, GateCache, NdParams,
    Variant, VariantCache,
};
use crate::{derive_seed, Error, Result};

pub const MIN_DEPTH: usize = 2;
pub const MAX_DEPTH: usize = 4;

/// Attention weights start in `±ATTENTION_INIT`, biases at zero.
const ATTENTION_INIT: f64 = 0.1;
const INIT_STREAM: u64 = 0x1417;

/// Model family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Arch {
    /// ND layer, then dense ReLU layers.
    Nd,
    /// Dense ReLU layers of the same width as the ND layer output.
    Mlp,
    /// ND layer gated by `sigmoid(W b + c)`, then dense ReLU layers.
    #[cfg_attr(feature = "serde", serde(rename = "attnd"))]
    AttNd,
}

impl Arch {
    pub const ALL: [Arch; 3] = [Arch::Nd, Arch::Mlp, Arch::AttNd];

    pub fn as_str(self) -> &'static str {
        match self {
            Arch::Nd => "nd",
            Arch::Mlp => "mlp",
            Arch::AttNd => "attnd",
        }
    }

    pub fn has_nd_layer(self) -> bool {
        !matches!(self, Arch::Mlp)
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nd" => Ok(Arch::Nd),
            "mlp" => Ok(Arch::Mlp),
            "attnd" => Ok(Arch::AttNd),
            other => Err(Error::InvalidConfig(format!(
                "unknown architecture '{other}'; expected nd, mlp or attnd"
            ))),
        }
    }
}

/// What a parameter group is, for gradient-check reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ParamFamily {
    NdAlpha,
    NdBeta,
    AttentionWeight,
    AttentionBias,
    DenseWeight,
    DenseBias,
}

/// A named, shaped view of one parameter array.
#[derive(Debug, Clone, Copy)]
pub struct ParamGroup<'a> {
    pub name: &'static str,
    /// Index of the dense layer for dense groups (0 = first hidden layer).
    pub layer: Option<usize>,
    pub family: ParamFamily,
    pub rows: usize,
    pub cols: usize,
    pub values: &'a [f64],
}

impl ParamGroup<'_> {
    pub fn label(&self) -> String {
        match self.layer {
            Some(k) => format!("{}.{k}", self.name),
            None => String::from(self.name),
        }
    }
}

/// First layer of a model.
#[derive(Debug, Clone, PartialEq)]
pub enum FrontLayer {
    Nd(NdParams),
    AttNd { nd: NdParams, gate: AttentionGate },
    Dense(DenseLayer),
}

impl FrontLayer {
    pub fn nd_params(&self) -> Option<&NdParams> {
        match self {
            FrontLayer::Nd(p) | FrontLayer::AttNd { nd: p, .. } => Some(p),
            FrontLayer::Dense(_) => None,
        }
    }

    pub fn nd_params_mut(&mut self) -> Option<&mut NdParams> {
        match self {
            FrontLayer::Nd(p) | FrontLayer::AttNd { nd: p, .. } => Some(p),
            FrontLayer::Dense(_) => None,
        }
    }

    pub fn gate_mut(&mut self) -> Option<&mut AttentionGate> {
        match self {
            FrontLayer::AttNd { gate, .. } => Some(gate),
            _ => None,
        }
    }
}

/// How the ND layer treats negative inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputPolicy {
    /// Reject negative bands.
    Strict,
    /// Switch to the smooth-absolute-value form when any band is negative.
    SignedFallback,
}

/// Stack of layers ending in a single logit.
///
/// `depth` counts input and output layers: depth 2 is
/// `input → first layer → Linear(1)`, and each extra level inserts one
/// dense ReLU layer of the same width.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    arch: Arch,
    depth: usize,
    n_bands: usize,
    eps: Epsilon,
    front: FrontLayer,
    hidden: Vec<DenseLayer>,
    head: DenseLayer,
}

#[derive(Debug, Clone)]
pub enum FrontCache {
    Nd(VariantCache),
    AttNd { nd: VariantCache, gate: GateCache },
    Dense(DenseCache),
}

/// Everything [`Model::backward`] needs from one forward pass.
#[derive(Debug, Clone)]
pub struct ModelCache {
    pub front: FrontCache,
    pub hidden: Vec<DenseCache>,
    pub head: DenseCache,
}

impl ModelCache {
    /// Sign pattern of every ReLU preactivation.
    pub fn relu_pattern(&self) -> Vec<bool> {
        let mut pattern = Vec::new();
        if let FrontCache::Dense(c) = &self.front {
            pattern.extend(c.preact.iter().map(|&z| z > 0.0));
        }
        for c in &self.hidden {
            pattern.extend(c.preact.iter().map(|&z| z > 0.0));
        }
        pattern
    }
}

/// Gradients for every parameter group (same order as
/// [`Model::param_groups`]) plus the input gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub groups: Vec<Vec<f64>>,
    pub d_input: Vec<f64>,
}

impl ModelGrads {
    pub fn zeros_like(model: &Model) -> Self {
        Self {
            groups: model.param_groups().iter().map(|g| vec![0.0; g.values.len()]).collect(),
            d_input: vec![0.0; model.n_bands],
        }
    }

    pub fn add_assign(&mut self, other: &ModelGrads) {
        for (a, b) in self.groups.iter_mut().zip(&other.groups) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (x, y) in self.d_input.iter_mut().zip(&other.d_input) {
            *x += y;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.groups.iter_mut().flatten().chain(self.d_input.iter_mut()) {
            *v *= factor;
        }
    }

    pub fn as_slices(&self) -> Vec<&[f64]> {
        self.groups.iter().map(Vec::as_slice).collect()
    }
}

fn check_depth(depth: usize) -> Result<()> {
    if (MIN_DEPTH..=MAX_DEPTH).contains(&depth) {
        Ok(())
    } else {
        Err(Error::UnsupportedDepth(depth))
    }
}

/// Builds an initialized model; see [`Model`] for the layer layout.
pub fn build_model(arch: Arch, depth: usize, n_bands: usize, seed: u64) -> Result<Model> {
    Model::build(arch, depth, n_bands, seed, Epsilon::default())
}

impl Model {
    /// Dense layers are drawn uniformly from `±1/√fan_in`; ND coefficients
    /// start at zero; attention weights in `±0.1` with zero bias.
    pub fn build(arch: Arch, depth: usize, n_bands: usize, seed: u64, eps: Epsilon) -> Result<Self> {
        check_depth(depth)?;
        if n_bands < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least two bands, got {n_bands}"
            )));
        }
        let width = pair_count(n_bands);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[INIT_STREAM]));
        let front = match arch {
            Arch::Nd => FrontLayer::Nd(NdParams::zeros(n_bands)),
            Arch::AttNd => {
                let dist = Uniform::new_inclusive(-ATTENTION_INIT, ATTENTION_INIT)
                    .map_err(|_| Error::InvalidConfig("bad attention init range".into()))?;
                let w: Vec<f64> = (0..width * n_bands).map(|_| dist.sample(&mut rng)).collect();
                let gate = AttentionGate::new(Matrix::from_row_major(width, n_bands, w)?, vec![0.0; width])?;
                FrontLayer::AttNd {
                    nd: NdParams::zeros(n_bands),
                    gate,
                }
            }
            Arch::Mlp => FrontLayer::Dense(DenseLayer::init_uniform(n_bands, width, Activation::Relu, &mut rng)?),
        };
        let hidden = (0..depth - MIN_DEPTH)
            .map(|_| DenseLayer::init_uniform(width, width, Activation::Relu, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let head = DenseLayer::init_uniform(width, 1, Activation::Identity, &mut rng)?;
        Ok(Self {
            arch,
            depth,
            n_bands,
            eps,
            front,
            hidden,
            head,
        })
    }

    /// Rebuilds a model from parameter arrays in [`Model::param_groups`] order.
    pub fn from_param_groups(
        arch: Arch,
        depth: usize,
        n_bands: usize,
        eps: Epsilon,
        groups: &[Vec<f64>],
    ) -> Result<Self> {
        let mut model = Self::build(arch, depth, n_bands, 0, eps)?;
        let mut targets = model.param_groups_mut();
        if targets.len() != groups.len() {
            return Err(Error::DimensionMismatch {
                context: "parameter group count",
                expected: targets.len(),
                found: groups.len(),
            });
        }
        for (dst, src) in targets.iter_mut().zip(groups) {
            if dst.len() != src.len() {
                return Err(Error::DimensionMismatch {
                    context: "parameter group length",
                    expected: dst.len(),
                    found: src.len(),
                });
            }
            if let Some(index) = crate::math::first_non_finite(src) {
                return Err(Error::NonFinite { index });
            }
            dst.copy_from_slice(src);
        }
        drop(targets);
        Ok(model)
    }

    pub fn arch(&self) -> Arch {
        self.arch
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    pub fn eps(&self) -> Epsilon {
        self.eps
    }

    pub fn front(&self) -> &FrontLayer {
        &self.front
    }

    pub fn front_mut(&mut self) -> &mut FrontLayer {
        &mut self.front
    }

    pub fn hidden(&self) -> &[DenseLayer] {
        &self.hidden
    }

    pub fn head(&self) -> &DenseLayer {
        &self.head
    }

    pub fn nd_params(&self) -> Option<&NdParams> {
        self.front.nd_params()
    }

    /// All parameter arrays in declared order: first layer, hidden layers,
    /// head. Checkpoints and the optimizer use this order.
    pub fn param_groups(&self) -> Vec<ParamGroup<'_>> {
        let mut groups = Vec::new();
        let width = pair_count(self.n_bands);
        match &self.front {
            FrontLayer::Nd(p) | FrontLayer::AttNd { nd: p, .. } => {
                groups.push(ParamGroup {
                    name: "nd.alpha",
                    layer: None,
                    family: ParamFamily::NdAlpha,
                    rows: width,
                    cols: 1,
                    values: p.alpha(),
                });
                groups.push(ParamGroup {
                    name: "nd.beta",
                    layer: None,
                    family: ParamFamily::NdBeta,
                    rows: width,
                    cols: 1,
                    values: p.beta(),
                });
            }
            FrontLayer::Dense(_) => {}
        }
        match &self.front {
            FrontLayer::AttNd { gate, .. } => {
                groups.push(ParamGroup {
                    name: "attention.weight",
                    layer: None,
                    family: ParamFamily::AttentionWeight,
                    rows: gate.weights.rows(),
                    cols: gate.weights.cols(),
                    values: gate.weights.as_slice(),
                });
                groups.push(ParamGroup {
                    name: "attention.bias",
                    layer: None,
                    family: ParamFamily::AttentionBias,
                    rows: gate.bias.len(),
                    cols: 1,
                    values: &gate.bias,
                });
            }
            FrontLayer::Dense(d) => push_dense(&mut groups, ("input.weight", "input.bias"), None, d),
            FrontLayer::Nd(_) => {}
        }
        for (k, layer) in self.hidden.iter().enumerate() {
            push_dense(&mut groups, ("hidden.weight", "hidden.bias"), Some(k), layer);
        }
        push_dense(&mut groups, ("head.weight", "head.bias"), None, &self.head);
        groups
    }

    /// Mutable views in [`Model::param_groups`] order.
    pub fn param_groups_mut(&mut self) -> Vec<&mut [f64]> {
        let mut groups: Vec<&mut [f64]> = Vec::new();
        match &mut self.front {
            FrontLayer::Nd(p) => {
                let (a, b) = p.split_mut();
                groups.push(a);
                groups.push(b);
            }
            FrontLayer::AttNd { nd, gate } => {
                let (a, b) = nd.split_mut();
                groups.push(a);
                groups.push(b);
                groups.push(gate.weights.as_mut_slice());
                groups.push(&mut gate.bias);
            }
            FrontLayer::Dense(d) => {
                let (w, b) = d.split_mut();
                groups.push(w);
                groups.push(b);
            }
        }
        for layer in &mut self.hidden {
            let (w, b) = layer.split_mut();
            groups.push(w);
            groups.push(b);
        }
        let (w, b) = self.head.split_mut();
        groups.push(w);
        groups.push(b);
        groups
    }

    /// Number of learnable scalars.
    pub fn param_count(&self) -> usize {
        self.param_groups().iter().map(|g| g.values.len()).sum()
    }

    /// Forward pass on nonnegative reflectances.
    pub fn forward(&self, bands: &[f64]) -> Result<(f64, ModelCache)> {
        self.forward_with(bands, InputPolicy::Strict)
    }

    pub fn forward_with(&self, bands: &[f64], policy: InputPolicy) -> Result<(f64, ModelCache)> {
        if bands.len() != self.n_bands {
            return Err(Error::DimensionMismatch {
                context: "model input",
                expected: self.n_bands,
                found: bands.len(),
            });
        }
        let variant = match policy {
            InputPolicy::SignedFallback if bands.iter().any(|&b| b < 0.0) => Variant::SmoothAbs,
            _ => Variant::Unsigned,
        };
        let (mut activ, front) = match &self.front {
            FrontLayer::Nd(p) => {
                let (out, cache) = forward_variant(variant, bands, p, self.eps)?;
                (out, FrontCache::Nd(cache))
            }
            FrontLayer::AttNd { nd, gate } => {
                let (nd_out, nd_cache) = forward_variant(variant, bands, nd, self.eps)?;
                let (out, gate_cache) = gate.forward(bands, &nd_out)?;
                (
                    out,
                    FrontCache::AttNd {
                        nd: nd_cache,
                        gate: gate_cache,
                    },
                )
            }
            FrontLayer::Dense(d) => {
                if let Some(index) = crate::math::first_non_finite(bands) {
                    return Err(Error::NonFinite { index });
                }
                let (out, cache) = d.forward(bands)?;
                (out, FrontCache::Dense(cache))
            }
        };
        let mut hidden = Vec::with_capacity(self.hidden.len());
        for layer in &self.hidden {
            let (out, cache) = layer.forward(&activ)?;
            hidden.push(cache);
            activ = out;
        }
        let (logit, head) = self.head.forward(&activ)?;
        Ok((logit[0], ModelCache { front, hidden, head }))
    }

    /// Logit for evaluation; tolerates negative (noisy) inputs.
    pub fn logit(&self, bands: &[f64]) -> Result<f64> {
        self.forward_with(bands, InputPolicy::SignedFallback).map(|(z, _)| z)
    }

    /// Backpropagates `dlogit` through the cached forward pass.
    pub fn backward(&self, cache: &ModelCache, dlogit: f64) -> Result<ModelGrads> {
        if cache.hidden.len() != self.hidden.len() {
            return Err(Error::DimensionMismatch {
                context: "model cache depth",
                expected: self.hidden.len(),
                found: cache.hidden.len(),
            });
        }
        let head = self.head.backward(&cache.head, &[dlogit])?;
        let mut upstream = head.d_input;
        let mut hidden_grads = Vec::with_capacity(self.hidden.len());
        for (layer, c) in self.hidden.iter().zip(&cache.hidden).rev() {
            let g = layer.backward(c, &upstream)?;
            upstream = g.d_input;
            hidden_grads.push((g.d_weights, g.d_bias));
        }
        hidden_grads.reverse();

        let mut groups = Vec::new();
        let d_input = match (&self.front, &cache.front) {
            (FrontLayer::Nd(p), FrontCache::Nd(c)) => {
                let g = backward_variant(c, &upstream, p, self.eps)?;
                groups.push(g.d_alpha);
                groups.push(g.d_beta);
                g.d_input
            }
            (FrontLayer::AttNd { nd, gate }, FrontCache::AttNd { nd: nc, gate: gc }) => {
                let gg = gate.backward(gc, &upstream)?;
                let g = backward_variant(nc, &gg.d_nd_outputs, nd, self.eps)?;
                groups.push(g.d_alpha);
                groups.push(g.d_beta);
                groups.push(gg.d_weights);
                groups.push(gg.d_bias);
                g.d_input.iter().zip(&gg.d_bands).map(|(a, b)| a + b).collect()
            }
            (FrontLayer::Dense(d), FrontCache::Dense(c)) => {
                let g = d.backward(c, &upstream)?;
                groups.push(g.d_weights);
                groups.push(g.d_bias);
                g.d_input
            }
            _ => {
                return Err(Error::InvalidConfig(
                    "cache was produced by a different architecture".into(),
                ))
            }
        };
        for (w, b) in hidden_grads {
            groups.push(w);
            groups.push(b);
        }
        groups.push(head.d_weights);
        groups.push(head.d_bias);
        Ok(ModelGrads { groups, d_input })
    }
}

fn push_dense<'a>(
    groups: &mut Vec<ParamGroup<'a>>,
    (wname, bname): (&'static str, &'static str),
    layer: Option<usize>,
    dense: &'a DenseLayer,
) {
    groups.push(ParamGroup {
        name: wname,
        layer,
        family: ParamFamily::DenseWeight,
        rows: dense.out_dim(),
        cols: dense.in_dim(),
        values: dense.weights().as_slice(),
    });
    groups.push(ParamGroup {
        name: bname,
        layer,
        family: ParamFamily::DenseBias,
        rows: dense.out_dim(),
        cols: 1,
        values: dense.bias(),
    });
}

/// Free-function form of [`Model::forward`].
pub fn model_forward(model: &Model, bands: &[f64]) -> Result<(f64, ModelCache)> {
    model.forward(bands)
}

/// Free-function form of [`Model::backward`].
pub fn model_backward(model: &Model, cache: &ModelCache, dlogit: f64) -> Result<ModelGrads> {
    model.backward(cache, dlogit)
}

/// Free-function form of [`Model::param_count`].
pub fn count_params(model: &Model) -> usize {
    model.param_count()
}
