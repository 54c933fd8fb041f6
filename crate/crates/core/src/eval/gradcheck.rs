//! Central finite-difference checks of every hand-written backward pass.
//!
//! Each trial draws a random problem (parameters, inputs, upstream weights),
//! computes the analytic gradient once, then perturbs coordinates one at a
//! time with a central stencil of spacing `step`. The error of a coordinate is
//! `|analytic − numeric| / max(|analytic|, |numeric|, REL_ERR_FLOOR)`.
//! Coordinates whose perturbation flips a ReLU unit are skipped, since the
//! finite difference straddles a kink there.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::Matrix;
use crate::nd::{
    attention_backward, attention_gate, backward_variant, forward_variant, pair_count, Epsilon,
    NdParams, Variant,
};
use crate::net::{bce_with_logits, Arch, FrontLayer, Model, ParamFamily};
use crate::{derive_seed, Error, Result};

/// Magnitude below which errors are measured absolutely.
pub const REL_ERR_FLOOR: f64 = 1e-3;

/// Smallest band magnitude drawn. Signed forms get a random sign on top.
///
/// Near zero, `√(b² + ε)` bends on the scale `√ε`, so for `ε = 1e-8` a
/// `1e-5` central difference is itself off by percent-level amounts there.
/// Those inputs are covered by a smaller-step check in the layer tests.
const BAND_MIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum GradFamily {
    Alpha,
    Beta,
    Input,
    Dense,
    Attention,
}

impl GradFamily {
    pub const ALL: [GradFamily; 5] = [
        GradFamily::Alpha,
        GradFamily::Beta,
        GradFamily::Input,
        GradFamily::Dense,
        GradFamily::Attention,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GradFamily::Alpha => "alpha",
            GradFamily::Beta => "beta",
            GradFamily::Input => "input",
            GradFamily::Dense => "dense",
            GradFamily::Attention => "attention",
        }
    }

    fn of(family: ParamFamily) -> Self {
        match family {
            ParamFamily::NdAlpha => GradFamily::Alpha,
            ParamFamily::NdBeta => GradFamily::Beta,
            ParamFamily::AttentionWeight | ParamFamily::AttentionBias => GradFamily::Attention,
            ParamFamily::DenseWeight | ParamFamily::DenseBias => GradFamily::Dense,
        }
    }
}

/// Central difference formula used as the numeric oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Stencil {
    /// `(f(x+h) − f(x−h)) / 2h`, truncation error `O(h²)`.
    ThreePoint,
    /// `(f(x−2h) − 8f(x−h) + 8f(x+h) − f(x+2h)) / 12h`, truncation error `O(h⁴)`.
    FivePoint,
}

impl Stencil {
    fn offsets(self) -> &'static [(f64, f64)] {
        // (multiple of h, weight); the sum is divided by h
        match self {
            Stencil::ThreePoint => &[(1.0, 0.5), (-1.0, -0.5)],
            Stencil::FivePoint => &[
                (-2.0, 1.0 / 12.0),
                (-1.0, -8.0 / 12.0),
                (1.0, 8.0 / 12.0),
                (2.0, -1.0 / 12.0),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GradcheckConfig {
    pub trials: usize,
    pub tolerance: f64,
    pub step: f64,
    pub stencil: Stencil,
    pub seed: u64,
    /// `ε` is drawn from these per trial.
    pub eps_values: Vec<f64>,
    /// Coordinates sampled per family per trial; `None` checks all of them.
    pub coords_per_family: Option<usize>,
    pub n_bands: usize,
    /// Use an all-zero upstream gradient (layer checks only).
    pub zero_upstream: bool,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            tolerance: 1e-5,
            step: 1e-5,
            stencil: Stencil::FivePoint,
            seed: 0,
            eps_values: vec![1e-8, 1e-4],
            coords_per_family: None,
            n_bands: 10,
            zero_upstream: false,
        }
    }
}

impl GradcheckConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance >= 0.0 && self.step > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be ≥ 0 and step > 0".into()));
        }
        if self.eps_values.is_empty() {
            return Err(Error::InvalidConfig("need at least one epsilon".into()));
        }
        for &e in &self.eps_values {
            Epsilon::new(e)?;
        }
        if self.n_bands < 2 {
            return Err(Error::InvalidConfig("need at least two bands".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FamilyReport {
    pub family: GradFamily,
    pub max_rel_error: f64,
    pub checked: usize,
    pub skipped: usize,
    pub max_abs_analytic: f64,
    pub max_abs_numeric: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GradcheckReport {
    pub target: String,
    pub trials: usize,
    pub tolerance: f64,
    pub step: f64,
    pub stencil: Stencil,
    pub families: Vec<FamilyReport>,
    /// Every family's worst error is strictly below the tolerance.
    pub passed: bool,
}

impl GradcheckReport {
    pub fn family(&self, family: GradFamily) -> Option<&FamilyReport> {
        self.families.iter().find(|f| f.family == family)
    }

    pub fn max_rel_error(&self) -> f64 {
        self.families.iter().map(|f| f.max_rel_error).fold(0.0, f64::max)
    }
}

/// A scalar function of a flat coordinate vector with a known gradient.
trait Problem {
    fn families(&self) -> &[GradFamily];
    fn analytic(&self) -> &[f64];
    /// Loss with coordinate `k` shifted by `delta`, plus the ReLU pattern if any.
    fn eval(&self, k: usize, delta: f64) -> Result<(f64, Vec<bool>)>;
    fn base_pattern(&self) -> &[bool];
}

fn run<P: Problem>(
    target: String,
    cfg: &GradcheckConfig,
    mut make: impl FnMut(&mut ChaCha8Rng) -> Result<P>,
) -> Result<GradcheckReport> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[0x9c4e]));
    let mut reports: Vec<FamilyReport> = Vec::new();
    for _ in 0..cfg.trials {
        let problem = make(&mut rng)?;
        for family in GradFamily::ALL {
            let members: Vec<usize> = problem
                .families()
                .iter()
                .enumerate()
                .filter(|(_, f)| **f == family)
                .map(|(k, _)| k)
                .collect();
            if members.is_empty() {
                continue;
            }
            let chosen: Vec<usize> = match cfg.coords_per_family {
                Some(m) if m < members.len() => sample(&mut rng, members.len(), m)
                    .into_iter()
                    .map(|pos| members[pos])
                    .collect(),
                _ => members,
            };
            let idx = match reports.iter().position(|r| r.family == family) {
                Some(i) => i,
                None => {
                    reports.push(FamilyReport {
                        family,
                        max_rel_error: 0.0,
                        checked: 0,
                        skipped: 0,
                        max_abs_analytic: 0.0,
                        max_abs_numeric: 0.0,
                    });
                    reports.len() - 1
                }
            };
            let report = &mut reports[idx];
            for k in chosen {
                let mut numeric = 0.0;
                let mut crosses_kink = false;
                for &(offset, weight) in cfg.stencil.offsets() {
                    let (loss, pattern) = problem.eval(k, offset * cfg.step)?;
                    crosses_kink |= pattern != problem.base_pattern();
                    numeric += weight * loss;
                }
                if crosses_kink {
                    report.skipped += 1;
                    continue;
                }
                numeric /= cfg.step;
                let analytic = problem.analytic()[k];
                let scale = analytic.abs().max(numeric.abs()).max(REL_ERR_FLOOR);
                let err = (analytic - numeric).abs() / scale;
                report.max_rel_error = report.max_rel_error.max(err);
                report.max_abs_analytic = report.max_abs_analytic.max(analytic.abs());
                report.max_abs_numeric = report.max_abs_numeric.max(numeric.abs());
                report.checked += 1;
            }
        }
    }
    reports.sort_by_key(|r| r.family);
    let passed = !reports.is_empty() && reports.iter().all(|r| r.max_rel_error < cfg.tolerance);
    Ok(GradcheckReport {
        target,
        trials: cfg.trials,
        tolerance: cfg.tolerance,
        step: cfg.step,
        stencil: cfg.stencil,
        families: reports,
        passed,
    })
}

fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

fn pick_eps(rng: &mut ChaCha8Rng, cfg: &GradcheckConfig) -> Result<Epsilon> {
    Epsilon::new(cfg.eps_values[rng.random_range(0..cfg.eps_values.len())])
}

/// Flat layout: `[α…, β…, bands…]` and optionally `[W…, c…]`.
struct LayerProblem {
    variant: Variant,
    n_bands: usize,
    eps: Epsilon,
    coords: Vec<f64>,
    upstream: Vec<f64>,
    gated: bool,
    families: Vec<GradFamily>,
    analytic: Vec<f64>,
}

impl LayerProblem {
    fn new(variant: Variant, gated: bool, cfg: &GradcheckConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        let n = cfg.n_bands;
        let pairs = pair_count(n);
        let eps = pick_eps(rng, cfg)?;
        let mut coords = uniform_vec(rng, 2 * pairs, -2.0, 2.0);
        let magnitudes = uniform_vec(rng, n, BAND_MIN, 1.0);
        coords.extend(magnitudes.into_iter().map(|m| match variant {
            Variant::Unsigned => m,
            Variant::SmoothAbs | Variant::SoftplusInputs => {
                if rng.random_bool(0.5) {
                    -m
                } else {
                    m
                }
            }
        }));
        let mut families = vec![GradFamily::Alpha; pairs];
        families.extend(vec![GradFamily::Beta; pairs]);
        families.extend(vec![GradFamily::Input; n]);
        if gated {
            coords.extend(uniform_vec(rng, pairs * n + pairs, -1.0, 1.0));
            families.extend(vec![GradFamily::Attention; pairs * n + pairs]);
        }
        let upstream = if cfg.zero_upstream {
            vec![0.0; pairs]
        } else {
            uniform_vec(rng, pairs, -1.0, 1.0)
        };
        let mut problem = Self {
            variant,
            n_bands: n,
            eps,
            coords,
            upstream,
            gated,
            families,
            analytic: Vec::new(),
        };
        problem.analytic = problem.gradient()?;
        Ok(problem)
    }

    fn split<'a>(&self, coords: &'a [f64]) -> Result<(NdParams, &'a [f64], Option<(Matrix, &'a [f64])>)> {
        let n = self.n_bands;
        let pairs = pair_count(n);
        let params = NdParams::from_parts(n, coords[..pairs].to_vec(), coords[pairs..2 * pairs].to_vec())?;
        let bands = &coords[2 * pairs..2 * pairs + n];
        let gate = if self.gated {
            let base = 2 * pairs + n;
            let w = Matrix::from_row_major(pairs, n, coords[base..base + pairs * n].to_vec())?;
            Some((w, &coords[base + pairs * n..]))
        } else {
            None
        };
        Ok((params, bands, gate))
    }

    fn loss(&self, coords: &[f64]) -> Result<f64> {
        let (params, bands, gate) = self.split(coords)?;
        let (mut out, _) = forward_variant(self.variant, bands, &params, self.eps)?;
        if let Some((w, c)) = gate {
            out = attention_gate(bands, &w, c, &out)?.0;
        }
        Ok(out.iter().zip(&self.upstream).map(|(o, d)| o * d).sum())
    }

    fn gradient(&self) -> Result<Vec<f64>> {
        let (params, bands, gate) = self.split(&self.coords)?;
        let (nd_out, cache) = forward_variant(self.variant, bands, &params, self.eps)?;
        let mut grad = Vec::with_capacity(self.coords.len());
        match gate {
            None => {
                let g = backward_variant(&cache, &self.upstream, &params, self.eps)?;
                grad.extend(g.d_alpha);
                grad.extend(g.d_beta);
                grad.extend(g.d_input);
            }
            Some((w, c)) => {
                let (_, gate_cache) = attention_gate(bands, &w, c, &nd_out)?;
                let gg = attention_backward(&w, &gate_cache, &self.upstream)?;
                let g = backward_variant(&cache, &gg.d_nd_outputs, &params, self.eps)?;
                grad.extend(g.d_alpha);
                grad.extend(g.d_beta);
                grad.extend(g.d_input.iter().zip(&gg.d_bands).map(|(a, b)| a + b));
                grad.extend(gg.d_weights);
                grad.extend(gg.d_bias);
            }
        }
        Ok(grad)
    }
}

impl Problem for LayerProblem {
    fn families(&self) -> &[GradFamily] {
        &self.families
    }

    fn analytic(&self) -> &[f64] {
        &self.analytic
    }

    fn eval(&self, k: usize, delta: f64) -> Result<(f64, Vec<bool>)> {
        let mut coords = self.coords.clone();
        coords[k] += delta;
        Ok((self.loss(&coords)?, Vec::new()))
    }

    fn base_pattern(&self) -> &[bool] {
        &[]
    }
}

/// Flat layout: every parameter group in declared order, then the bands.
struct ModelProblem {
    model: Model,
    bands: Vec<f64>,
    label: u8,
    /// `(group, offset)` per coordinate; `group == usize::MAX` marks a band.
    locations: Vec<(usize, usize)>,
    families: Vec<GradFamily>,
    analytic: Vec<f64>,
    pattern: Vec<bool>,
}

impl ModelProblem {
    fn new(arch: Arch, depth: usize, cfg: &GradcheckConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        let eps = pick_eps(rng, cfg)?;
        let mut model = Model::build(arch, depth, cfg.n_bands, rng.random(), eps)?;
        // move ND and gate parameters off their symmetric initial values
        match model.front_mut() {
            FrontLayer::Nd(p) => randomize_nd(p, rng),
            FrontLayer::AttNd { nd, gate } => {
                randomize_nd(nd, rng);
                for v in gate.weights.as_mut_slice().iter_mut().chain(gate.bias.iter_mut()) {
                    *v = rng.random_range(-1.0..1.0);
                }
            }
            FrontLayer::Dense(_) => {}
        }
        let bands = uniform_vec(rng, cfg.n_bands, BAND_MIN, 1.0);
        let label = u8::from(rng.random_bool(0.5));

        let mut locations = Vec::new();
        let mut families = Vec::new();
        for (g, group) in model.param_groups().iter().enumerate() {
            for offset in 0..group.values.len() {
                locations.push((g, offset));
                families.push(GradFamily::of(group.family));
            }
        }
        for b in 0..cfg.n_bands {
            locations.push((usize::MAX, b));
            families.push(GradFamily::Input);
        }

        let (logit, cache) = model.forward(&bands)?;
        let (_, dlogit) = bce_with_logits(logit, label);
        let grads = model.backward(&cache, dlogit)?;
        let mut analytic: Vec<f64> = grads.groups.into_iter().flatten().collect();
        analytic.extend(grads.d_input);
        Ok(Self {
            pattern: cache.relu_pattern(),
            model,
            bands,
            label,
            locations,
            families,
            analytic,
        })
    }
}

fn randomize_nd(p: &mut NdParams, rng: &mut ChaCha8Rng) {
    let (alpha, beta) = p.split_mut();
    for v in alpha.iter_mut().chain(beta.iter_mut()) {
        *v = rng.random_range(-2.0..2.0);
    }
}

impl Problem for ModelProblem {
    fn families(&self) -> &[GradFamily] {
        &self.families
    }

    fn analytic(&self) -> &[f64] {
        &self.analytic
    }

    fn eval(&self, k: usize, delta: f64) -> Result<(f64, Vec<bool>)> {
        let (group, offset) = self.locations[k];
        let (logit, cache) = if group == usize::MAX {
            let mut bands = self.bands.clone();
            bands[offset] += delta;
            self.model.forward(&bands)?
        } else {
            let mut model = self.model.clone();
            model.param_groups_mut()[group][offset] += delta;
            model.forward(&self.bands)?
        };
        Ok((bce_with_logits(logit, self.label).0, cache.relu_pattern()))
    }

    fn base_pattern(&self) -> &[bool] {
        &self.pattern
    }
}

/// Checks one ND layer form in isolation against `L = Σ δ_p N_p`.
pub fn gradcheck_layer(variant: Variant, cfg: &GradcheckConfig) -> Result<GradcheckReport> {
    let target = format!("nd-layer/{variant:?}").to_lowercase();
    run(target, cfg, |rng| LayerProblem::new(variant, false, cfg, rng))
}

/// Checks the gated ND layer (ND parameters, gate weights and bands).
pub fn gradcheck_attention(cfg: &GradcheckConfig) -> Result<GradcheckReport> {
    run("attention-gate".into(), cfg, |rng| LayerProblem::new(Variant::Unsigned, true, cfg, rng))
}

/// Checks a whole model's BCE gradient, including input gradients.
pub fn gradcheck(arch: Arch, depth: usize, cfg: &GradcheckConfig) -> Result<GradcheckReport> {
    let target = format!("{arch}/depth-{depth}");
    run(target, cfg, |rng| ModelProblem::new(arch, depth, cfg, rng))
}
