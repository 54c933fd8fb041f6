use alloc::vec::Vec;

use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Dataset;
use crate::{Error, Result};

/// Multiplicative Gaussian noise: `b̃ = b + η·|b|·z`, `z ~ N(0, 1)` drawn
/// independently per value.
///
/// Labels are untouched and values are not clamped, so large `η` can push
/// small reflectances slightly negative. `η = 0` returns an exact copy.
pub fn inject_noise(ds: &Dataset, eta: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=0.5).contains(&eta) {
        return Err(Error::InvalidConfig(alloc::format!(
            "noise level {eta} outside [0, 0.5]"
        )));
    }
    if eta == 0.0 {
        return Ok(ds.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = ds
        .values()
        .iter()
        .map(|&b| {
            let z: f64 = StandardNormal.sample(&mut rng);
            b + eta * b.abs() * z
        })
        .collect();
    Ok(ds.with_values(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn constant(value: f64, n: usize) -> Dataset {
        Dataset::new(Dataset::default_band_names(1), vec![value; n], vec![0; n]).unwrap()
    }

    #[test]
    fn zero_eta_is_identity() {
        let ds = constant(0.37, 10);
        assert_eq!(inject_noise(&ds, 0.0, 1).unwrap(), ds);
    }

    #[test]
    fn zero_reflectance_stays_zero() {
        let ds = constant(0.0, 50);
        assert!(inject_noise(&ds, 0.3, 2).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_out_of_range_eta() {
        let ds = constant(1.0, 2);
        assert!(inject_noise(&ds, -0.1, 1).is_err());
        assert!(inject_noise(&ds, 0.6, 1).is_err());
    }

    #[test]
    fn spread_and_bias_match_the_model() {
        // Monte-Carlo oracle: b = 1, η = 0.1 gives N(1, 0.1²)
        let n = 100_000;
        let noisy = inject_noise(&constant(1.0, n), 0.1, 99).unwrap();
        let mean = noisy.values().iter().sum::<f64>() / n as f64;
        let var = noisy.values().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        let sd = libm::sqrt(var);
        assert!((sd - 0.1).abs() < 0.002, "sd {sd}");
        // standard error of the mean is 0.1/√n ≈ 3.2e-4
        assert!((mean - 1.0).abs() < 5.0 * 0.1 / libm::sqrt(n as f64));
        assert_eq!(noisy.labels(), constant(1.0, n).labels());
    }
}
