//! Signed-input forms of the ND layer, for use behind layers whose outputs
//! can be negative (or on noisy reflectances).
//!
//! The adjoints here follow from the chain rule on the forward forms and are
//! checked only against finite differences.

use alloc::vec::Vec;

use super::layer::{forward_unchecked, NdCache, NdGradients, NdParams};
use super::{check_bands, check_upstream, nd_backward, Epsilon};
use crate::math::{sigmoid, softplus};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedPairCache {
    pub sigma_alpha: f64,
    pub sigma_beta: f64,
    pub b_i: f64,
    pub b_j: f64,
    /// `√(b_i² + ε)`
    pub abs_i: f64,
    /// `√(b_j² + ε)`
    pub abs_j: f64,
    pub numer: f64,
    pub denom: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignedNdCache {
    n_bands: usize,
    pairs: Vec<SignedPairCache>,
}

impl SignedNdCache {
    pub fn pairs(&self) -> &[SignedPairCache] {
        &self.pairs
    }
}

/// `N_ij = (σα·b_i − σβ·b_j) / (σα·√(b_i²+ε) + σβ·√(b_j²+ε) + ε)`.
///
/// Accepts any finite input; the same `ε` is used inside the square roots
/// and in the denominator.
pub fn nd_forward_signed(
    bands: &[f64],
    params: &NdParams,
    eps: Epsilon,
) -> Result<(Vec<f64>, SignedNdCache)> {
    check_bands(bands, params.n_bands())?;
    let n = params.n_bands();
    let e = eps.value();
    let smooth_abs: Vec<f64> = bands.iter().map(|b| libm::sqrt(b * b + e)).collect();
    let mut outputs = Vec::with_capacity(params.n_pairs());
    let mut pairs = Vec::with_capacity(params.n_pairs());
    let mut p = 0;
    for i in 0..n {
        for j in i + 1..n {
            let sigma_alpha = softplus(params.alpha()[p]);
            let sigma_beta = softplus(params.beta()[p]);
            let numer = sigma_alpha * bands[i] - sigma_beta * bands[j];
            let denom = sigma_alpha * smooth_abs[i] + sigma_beta * smooth_abs[j] + e;
            outputs.push(numer / denom);
            pairs.push(SignedPairCache {
                sigma_alpha,
                sigma_beta,
                b_i: bands[i],
                b_j: bands[j],
                abs_i: smooth_abs[i],
                abs_j: smooth_abs[j],
                numer,
                denom,
            });
            p += 1;
        }
    }
    Ok((outputs, SignedNdCache { n_bands: n, pairs }))
}

/// Backward pass for [`nd_forward_signed`].
pub fn nd_backward_signed(
    cache: &SignedNdCache,
    upstream: &[f64],
    params: &NdParams,
    _eps: Epsilon,
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
    let mut grads = NdGradients::zeros(n, cache.pairs.len());
    let mut p = 0;
    for i in 0..n {
        for j in i + 1..n {
            let c = &cache.pairs[p];
            let delta = upstream[p];
            let d = c.denom;
            let d_sq = d * d;
            let ratio = c.numer / d;
            let s_alpha = sigmoid(params.alpha()[p]);
            let s_beta = sigmoid(params.beta()[p]);
            // ∂N/∂ξ = (∂A/∂ξ − N·∂D/∂ξ) / D
            grads.d_alpha[p] = delta * s_alpha * (c.b_i * d - c.numer * c.abs_i) / d_sq;
            grads.d_beta[p] = delta * s_beta * (-c.b_j * d - c.numer * c.abs_j) / d_sq;
            grads.d_input[i] += delta * c.sigma_alpha * (1.0 - ratio * c.b_i / c.abs_i) / d;
            grads.d_input[j] += delta * -c.sigma_beta * (1.0 + ratio * c.b_j / c.abs_j) / d;
            p += 1;
        }
    }
    Ok(grads)
}

/// Cache for [`nd_forward_softplus_inputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct SoftplusNdCache {
    raw: Vec<f64>,
    inner: NdCache,
}

impl SoftplusNdCache {
    pub fn inner(&self) -> &NdCache {
        &self.inner
    }
}

/// Reflectance form applied to `softplus(b_k)`.
pub fn nd_forward_softplus_inputs(
    bands: &[f64],
    params: &NdParams,
    eps: Epsilon,
) -> Result<(Vec<f64>, SoftplusNdCache)> {
    check_bands(bands, params.n_bands())?;
    let lifted: Vec<f64> = bands.iter().map(|&b| softplus(b)).collect();
    let (outputs, inner) = forward_unchecked(&lifted, params, eps);
    Ok((
        outputs,
        SoftplusNdCache {
            raw: bands.to_vec(),
            inner,
        },
    ))
}

/// Backward pass for [`nd_forward_softplus_inputs`]; input gradients carry
/// the extra `sigmoid(b_k)` factor.
pub fn nd_backward_softplus_inputs(
    cache: &SoftplusNdCache,
    upstream: &[f64],
    params: &NdParams,
    eps: Epsilon,
) -> Result<NdGradients> {
    let mut grads = nd_backward(&cache.inner, upstream, params, eps)?;
    for (g, &b) in grads.d_input.iter_mut().zip(&cache.raw) {
        *g *= sigmoid(b);
    }
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nd::nd_forward;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn eps(v: f64) -> Epsilon {
        Epsilon::new(v).unwrap()
    }

    fn one_pair(alpha: f64, beta: f64) -> NdParams {
        NdParams::from_parts(2, alloc::vec![alpha], alloc::vec![beta]).unwrap()
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
    }

    // Oracle forms written straight from the formulas.
    fn smooth_abs_direct(a: f64, b: f64, bi: f64, bj: f64, e: f64) -> f64 {
        let (sa, sb) = (libm::log(1.0 + libm::exp(a)), libm::log(1.0 + libm::exp(b)));
        (sa * bi - sb * bj) / (sa * libm::sqrt(bi * bi + e) + sb * libm::sqrt(bj * bj + e) + e)
    }

    fn softplus_inputs_direct(a: f64, b: f64, bi: f64, bj: f64, e: f64) -> f64 {
        let sp = |x: f64| libm::log(1.0 + libm::exp(x));
        let (ti, tj) = (sp(bi), sp(bj));
        (sp(a) * ti - sp(b) * tj) / (sp(a) * ti + sp(b) * tj + e)
    }

    type Direct = fn(f64, f64, f64, f64, f64) -> f64;

    fn worst_fd_error(
        seed: u64,
        direct: Direct,
        grads: impl Fn(&NdParams, [f64; 2], f64, f64) -> NdGradients,
    ) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let (bi, bj) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let e = if rng.random_bool(0.5) { 1e-8 } else { 1e-4 };
            let delta = rng.random_range(-2.0..2.0);
            let g = grads(&one_pair(a, b), [bi, bj], e, delta);
            let fd = |f: &dyn Fn(f64) -> f64| delta * (f(h) - f(-h)) / (2.0 * h);
            let checks = [
                (g.d_alpha[0], fd(&|t| direct(a + t, b, bi, bj, e))),
                (g.d_beta[0], fd(&|t| direct(a, b + t, bi, bj, e))),
                (g.d_input[0], fd(&|t| direct(a, b, bi + t, bj, e))),
                (g.d_input[1], fd(&|t| direct(a, b, bi, bj + t, e))),
            ];
            for (analytic, numeric) in checks {
                worst = worst.max(rel_err(analytic, numeric));
            }
        }
        worst
    }

    #[test]
    fn smooth_abs_input_gradient_near_zero() {
        // the step shrinks with the bend scale √(b² + ε) of the denominator
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let e = 1e-8;
            let bi = rng.random_range(-1e-3..1e-3);
            let bj = rng.random_range(-1.0..1.0);
            let h = 1e-3 * libm::sqrt(bi * bi + e);
            let (_, cache) = nd_forward_signed(&[bi, bj], &one_pair(a, b), eps(e)).unwrap();
            let g = nd_backward_signed(&cache, &[1.0], &one_pair(a, b), eps(e)).unwrap();
            let numeric = (smooth_abs_direct(a, b, bi + h, bj, e) - smooth_abs_direct(a, b, bi - h, bj, e)) / (2.0 * h);
            assert!(rel_err(g.d_input[0], numeric) < 1e-5, "{} vs {numeric}", g.d_input[0]);
        }
    }

    #[test]
    fn signed_matches_unsigned_on_reflectances() {
        let params = one_pair(0.0, 0.0);
        let (s, _) = nd_forward_signed(&[0.5, 0.1], &params, eps(1e-12)).unwrap();
        let (u, _) = nd_forward(&[0.5, 0.1], &params, eps(1e-12)).unwrap();
        assert!((s[0] - u[0]).abs() < 1e-6);
    }

    #[test]
    fn opposite_signs_keep_sign_of_first_band() {
        for b in [0.3, -0.7, 2.0] {
            let (out, _) = nd_forward_signed(&[b, -b], &one_pair(0.4, 0.4), eps(1e-8)).unwrap();
            assert!(out[0] != 0.0 && out[0].signum() == b.signum());
            assert!(out[0].abs() <= 1.0);
        }
    }

    #[test]
    fn zero_bands_give_zero() {
        let (out, cache) = nd_forward_signed(&[0.0, 0.0], &one_pair(1.0, -1.0), eps(1e-8)).unwrap();
        assert_eq!(out[0], 0.0);
        assert!(cache.pairs()[0].denom > 0.0);
    }

    #[test]
    fn signed_rejects_nan() {
        assert!(nd_forward_signed(&[f64::NAN, 0.0], &one_pair(0.0, 0.0), eps(1e-8)).is_err());
        assert!(nd_forward_softplus_inputs(&[0.0, f64::INFINITY], &one_pair(0.0, 0.0), eps(1e-8)).is_err());
    }

    #[test]
    fn signed_zero_upstream() {
        let params = NdParams::zeros(4);
        let (_, cache) = nd_forward_signed(&[-0.3, 0.2, 0.0, 1.1], &params, eps(1e-8)).unwrap();
        let g = nd_backward_signed(&cache, &[0.0; 6], &params, eps(1e-8)).unwrap();
        assert!(g.d_alpha.iter().chain(&g.d_beta).chain(&g.d_input).all(|&v| v == 0.0));
    }

    #[test]
    fn signed_gradients_match_finite_differences() {
        let worst = worst_fd_error(41, smooth_abs_direct, |params, bands, e, delta| {
            let (_, cache) = nd_forward_signed(&bands, params, eps(e)).unwrap();
            nd_backward_signed(&cache, &[delta], params, eps(e)).unwrap()
        });
        assert!(worst < 1e-5, "worst relative error {worst}");
    }

    #[test]
    fn signed_gradients_match_unsigned_on_reflectances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let params = one_pair(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let bands = [rng.random_range(0.01..1.0), rng.random_range(0.01..1.0)];
            let e = eps(1e-12);
            let (_, sc) = nd_forward_signed(&bands, &params, e).unwrap();
            let (_, uc) = nd_forward(&bands, &params, e).unwrap();
            let gs = nd_backward_signed(&sc, &[1.0], &params, e).unwrap();
            let gu = nd_backward(&uc, &[1.0], &params, e).unwrap();
            let pairs = [
                (gs.d_alpha[0], gu.d_alpha[0]),
                (gs.d_beta[0], gu.d_beta[0]),
                (gs.d_input[0], gu.d_input[0]),
                (gs.d_input[1], gu.d_input[1]),
            ];
            for (s, u) in pairs {
                assert!((s - u).abs() <= 1e-5 * u.abs().max(1e-12), "{s} vs {u}");
            }
        }
    }

    #[test]
    fn softplus_inputs_examples() {
        let (out, _) = nd_forward_softplus_inputs(&[0.0, 0.0], &one_pair(0.7, 0.7), eps(1e-8)).unwrap();
        assert_eq!(out[0], 0.0);
        let (out, _) = nd_forward_softplus_inputs(&[3.0, -3.0], &one_pair(0.0, 0.0), eps(1e-12)).unwrap();
        // softplus(3) ≈ 3.0486, softplus(−3) ≈ 0.0486
        assert!((out[0] - 0.9686).abs() < 1e-3);
        assert!(out[0] > -1.0 && out[0] < 1.0);
    }

    #[test]
    fn softplus_inputs_gradients_match_finite_differences() {
        let worst = worst_fd_error(43, softplus_inputs_direct, |params, bands, e, delta| {
            let (_, cache) = nd_forward_softplus_inputs(&bands, params, eps(e)).unwrap();
            nd_backward_softplus_inputs(&cache, &[delta], params, eps(e)).unwrap()
        });
        assert!(worst < 1e-5, "worst relative error {worst}");
    }
}
