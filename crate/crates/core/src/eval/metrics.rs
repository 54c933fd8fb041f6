use alloc::format;
use alloc::vec::Vec;

use crate::data::{inject_noise, Dataset};
use crate::net::Model;
use crate::{derive_seed, Error, Result};

const NOISE_STREAM: u64 = 0x401e;

/// Fraction of rows where `sigmoid(logit) > 0.5` matches the label.
///
/// A logit of exactly zero predicts class 0. Negative (noisy) inputs are
/// routed through the signed ND form.
pub fn accuracy(model: &Model, ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if ds.n_bands() != model.n_bands() {
        return Err(Error::DimensionMismatch {
            context: "dataset bands",
            expected: model.n_bands(),
            found: ds.n_bands(),
        });
    }
    let mut correct = 0usize;
    for (row, label) in ds.iter() {
        let predicted = u8::from(model.logit(row)? > 0.0);
        correct += usize::from(predicted == label);
    }
    Ok(correct as f64 / ds.len() as f64)
}

/// Accuracy percentage points per 100 parameters.
pub fn efficiency(accuracy_pct: f64, params: usize) -> f64 {
    accuracy_pct / params as f64 * 100.0
}

/// Seed of the noise realization for level `eta` under `seed`.
pub fn noise_seed(seed: u64, eta: f64) -> u64 {
    derive_seed(seed, &[NOISE_STREAM, eta.to_bits()])
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoisePoint {
    pub eta: f64,
    /// Fraction in `[0, 1]`.
    pub accuracy: f64,
}

/// Accuracy on noisy copies of `test`, one per level.
///
/// The realization for each level depends only on `(seed, eta)`, so models
/// swept with the same seed see identical noisy inputs.
pub fn noise_sweep(model: &Model, test: &Dataset, etas: &[f64], seed: u64) -> Result<Vec<NoisePoint>> {
    if etas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig("noise levels must be sorted".into()));
    }
    if let Some(bad) = etas.iter().find(|e| !(0.0..=0.5).contains(*e)) {
        return Err(Error::InvalidConfig(format!("noise level {bad} outside [0, 0.5]")));
    }
    etas.iter()
        .map(|&eta| {
            let noisy = inject_noise(test, eta, noise_seed(seed, eta))?;
            Ok(NoisePoint {
                eta,
                accuracy: accuracy(model, &noisy)?,
            })
        })
        .collect()
}

/// Sample standard deviation (`n − 1` denominator); zero for fewer than
/// two values.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    libm::sqrt(ss / (n - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{build_model, Arch};
    use alloc::vec;

    fn constant_model(logit: f64) -> Model {
        let mut m = build_model(Arch::Mlp, 2, 2, 0).unwrap();
        let mut groups = m.param_groups_mut();
        let last = groups.len() - 1;
        for (k, g) in groups.iter_mut().enumerate() {
            for v in g.iter_mut() {
                *v = if k == last { logit } else { 0.0 };
            }
        }
        drop(groups);
        m
    }

    fn ds(labels: &[u8]) -> Dataset {
        let values = (0..labels.len() * 2).map(|k| 0.1 + k as f64 * 0.01).collect();
        Dataset::new(Dataset::default_band_names(2), values, labels.to_vec()).unwrap()
    }

    #[test]
    fn constant_predictions() {
        let m = constant_model(40.0);
        assert_eq!(accuracy(&m, &ds(&[1, 1, 1, 1])).unwrap(), 1.0);
        assert_eq!(accuracy(&m, &ds(&[0, 0, 0])).unwrap(), 0.0);
        // exactly zero logit predicts class 0
        let m = constant_model(0.0);
        assert_eq!(accuracy(&m, &ds(&[0, 1])).unwrap(), 0.5);
    }

    #[test]
    fn hand_built_four_sample_case() {
        // logit = w·b + c on an MLP head fed through identity-like ReLU units
        let mut m = build_model(Arch::Mlp, 2, 2, 0).unwrap();
        {
            let mut g = m.param_groups_mut();
            // input layer: unit 0 copies band 0, others zero
            g[0].fill(0.0);
            g[0][0] = 1.0;
            g[1].fill(0.0);
            // head: logit = band0 − 0.5
            g[2].fill(0.0);
            g[2][0] = 1.0;
            g[3][0] = -0.5;
        }
        let data = Dataset::new(
            Dataset::default_band_names(2),
            vec![0.9, 0.0, 0.2, 0.0, 0.7, 0.0, 0.6, 0.0],
            vec![1, 0, 1, 0],
        )
        .unwrap();
        // predictions 1, 0, 1, 1 against labels 1, 0, 1, 0
        assert_eq!(accuracy(&m, &data).unwrap(), 0.75);
    }

    #[test]
    fn efficiency_values() {
        assert!((efficiency(96.50, 136) - 70.96).abs() < 0.01);
        assert!((efficiency(97.20, 541) - 17.97).abs() < 0.01);
        assert_eq!(efficiency(100.0, 100), 100.0);
    }

    #[test]
    fn sweep_identity_and_constant_model() {
        let m = constant_model(3.0);
        let data = ds(&[1, 0, 1, 1, 0]);
        let sweep = noise_sweep(&m, &data, &[0.0], 4).unwrap();
        assert_eq!(sweep[0].accuracy, accuracy(&m, &data).unwrap());
        let sweep = noise_sweep(&m, &data, &[0.0, 0.05, 0.1, 0.5], 4).unwrap();
        assert!(sweep.iter().all(|p| p.accuracy == 0.6));
        assert!(noise_sweep(&m, &data, &[0.1, 0.0], 4).is_err());
        assert!(noise_sweep(&m, &data, &[0.7], 4).is_err());
    }

    #[test]
    fn std_uses_sample_denominator() {
        assert_eq!(sample_std(&[1.0]), 0.0);
        assert!((sample_std(&[1.0, 3.0]) - libm::sqrt(2.0)).abs() < 1e-15);
    }
}
