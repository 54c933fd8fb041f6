use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::math::softplus;
use crate::nd::{pair_index, PairIndexer};
use crate::net::Model;
use crate::{Error, Result};

/// Learned band weighting per pair: entry `(i, j)` with `i < j` holds
/// `softplus(α_ij) / softplus(β_ij)`, entry `(j, i)` its reciprocal, and the
/// diagonal 1.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoeffRatioMatrix {
    band_names: Vec<String>,
    n: usize,
    values: Vec<f64>,
}

/// One pair in an asymmetry ranking.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AsymmetricPair {
    pub i: usize,
    pub j: usize,
    pub pair: usize,
    pub ratio: f64,
    /// `max(ratio, 1/ratio)`.
    pub asymmetry: f64,
}

/// Ratio matrix of a model whose first layer is ND or gated ND.
pub fn coeff_ratios(model: &Model) -> Result<CoeffRatioMatrix> {
    let params = model.nd_params().ok_or(Error::NotNdModel)?;
    let n = params.n_bands();
    let mut values = vec![1.0; n * n];
    let mut p = 0;
    for i in 0..n {
        for j in i + 1..n {
            let ratio = softplus(params.alpha()[p]) / softplus(params.beta()[p]);
            values[i * n + j] = ratio;
            values[j * n + i] = 1.0 / ratio;
            p += 1;
        }
    }
    Ok(CoeffRatioMatrix {
        band_names: Dataset::default_band_names(n),
        n,
        values,
    })
}

impl CoeffRatioMatrix {
    pub fn with_band_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "band names",
                expected: self.n,
                found: names.len(),
            });
        }
        self.band_names = names;
        Ok(self)
    }

    pub fn n_bands(&self) -> usize {
        self.n
    }

    pub fn band_names(&self) -> &[String] {
        &self.band_names
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Row-major `n × n` values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Ratio of pair `(i, j)`, `i < j`.
    pub fn ratio(&self, i: usize, j: usize) -> Result<f64> {
        pair_index(i, j, self.n)?;
        Ok(self.get(i, j))
    }

    /// The `k` most asymmetric pairs (all pairs if `k` exceeds the pair
    /// count), by `max(r, 1/r)` descending; ties keep pair order.
    pub fn top_asymmetric(&self, k: usize) -> Vec<AsymmetricPair> {
        let mut ranked: Vec<AsymmetricPair> = PairIndexer::new(self.n)
            .pairs()
            .iter()
            .enumerate()
            .map(|(pair, &(i, j))| {
                let ratio = self.get(i, j);
                AsymmetricPair {
                    i,
                    j,
                    pair,
                    ratio,
                    asymmetry: ratio.max(1.0 / ratio),
                }
            })
            .collect();
        ranked.sort_by(|a, b| b.asymmetry.total_cmp(&a.asymmetry).then(a.pair.cmp(&b.pair)));
        ranked.truncate(k);
        ranked
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{build_model, Arch};

    #[test]
    fn fresh_model_is_symmetric() {
        let m = build_model(Arch::Nd, 2, 5, 1).unwrap();
        let r = coeff_ratios(&m).unwrap();
        assert!(r.values().iter().all(|&v| v == 1.0));
        let m = build_model(Arch::AttNd, 3, 4, 1).unwrap();
        assert!(coeff_ratios(&m).unwrap().values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn mlp_has_no_ratios() {
        let m = build_model(Arch::Mlp, 2, 5, 1).unwrap();
        assert_eq!(coeff_ratios(&m), Err(Error::NotNdModel));
    }

    #[test]
    fn ranking_uses_symmetric_asymmetry() {
        let mut m = build_model(Arch::Nd, 2, 3, 0).unwrap();
        {
            let p = m.front_mut().nd_params_mut().unwrap();
            // ratios: pair0 = 1, pair1 = 4, pair2 = 0.2 (via β)
            let target = [1.0, 4.0, 0.2];
            let inv = |y: f64| libm::log(libm::expm1(y));
            for (k, r) in target.iter().enumerate() {
                p.alpha_mut()[k] = inv(*r);
                p.beta_mut()[k] = inv(1.0);
            }
        }
        let r = coeff_ratios(&m).unwrap();
        let top = r.top_asymmetric(10);
        assert_eq!(top.iter().map(|p| p.pair).collect::<Vec<_>>(), vec![2, 1, 0]);
        assert!((top[0].asymmetry - 5.0).abs() < 1e-9);
        assert!((r.get(1, 0) * r.get(0, 1) - 1.0).abs() < 1e-15);
        assert_eq!(r.top_asymmetric(1).len(), 1);
    }

    #[test]
    fn ties_keep_pair_order() {
        let m = build_model(Arch::Nd, 2, 4, 0).unwrap();
        let top = coeff_ratios(&m).unwrap().top_asymmetric(3);
        assert_eq!(top.iter().map(|p| p.pair).collect::<Vec<_>>(), vec![0, 1, 2]);
    }
}
