use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Dataset;
use crate::{derive_seed, Error, Result};

/// Smallest reflectance the generator emits.
pub const MIN_REFLECTANCE: f64 = 1e-4;

/// Parameters of the synthetic two-class spectral generator.
///
/// Band `k` of a sample is `gain · mean_c[k] · (1 + Σ_m u_m · mode_m[k] + scale · z_k)`,
/// where `gain` is uniform in `[gain_min, gain_max]` per sample, each `u_m`
/// is one standard normal per sample shared by all bands, and `z_k` is
/// standard normal per band. The modes give the within-class covariance its
/// correlated part (for example a canopy-vigor or moisture shape). Values are
/// clamped below at [`MIN_REFLECTANCE`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SynthSpec {
    pub n_samples: usize,
    pub band_names: Vec<String>,
    pub class0_mean: Vec<f64>,
    pub class1_mean: Vec<f64>,
    /// Relative within-class standard deviation per band.
    pub within_class_scale: f64,
    /// Relative per-band loadings of shared within-class variation.
    #[cfg_attr(feature = "serde", serde(default))]
    pub variation_modes: Vec<Vec<f64>>,
    pub gain_min: f64,
    pub gain_max: f64,
    #[cfg_attr(feature = "serde", serde(default = "half"))]
    pub class1_fraction: f64,
    pub seed: u64,
}

#[cfg(feature = "serde")]
fn half() -> f64 {
    0.5
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.band_names.len();
        if n < 2 {
            return Err(Error::InvalidConfig("band_names: need at least two bands".into()));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidConfig("n_samples: must be positive".into()));
        }
        for (field, mean) in [("class0_mean", &self.class0_mean), ("class1_mean", &self.class1_mean)] {
            if mean.len() != n {
                return Err(Error::InvalidConfig(format!(
                    "{field}: has {} entries, expected {n}",
                    mean.len()
                )));
            }
            if mean.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
                return Err(Error::InvalidConfig(format!("{field}: entries must be positive")));
            }
        }
        if !(self.within_class_scale.is_finite() && self.within_class_scale >= 0.0) {
            return Err(Error::InvalidConfig("within_class_scale: must be nonnegative".into()));
        }
        for (m, mode) in self.variation_modes.iter().enumerate() {
            if mode.len() != n {
                return Err(Error::InvalidConfig(format!(
                    "variation_modes[{m}]: has {} entries, expected {n}",
                    mode.len()
                )));
            }
            if mode.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!("variation_modes[{m}]: entries must be finite")));
            }
        }
        if !(self.gain_min.is_finite() && self.gain_max.is_finite() && self.gain_min > 0.0) {
            return Err(Error::InvalidConfig("gain_min/gain_max: must be positive".into()));
        }
        if self.gain_min > self.gain_max {
            return Err(Error::InvalidConfig("gain_min: must not exceed gain_max".into()));
        }
        if !(self.class1_fraction > 0.0 && self.class1_fraction < 1.0) {
            return Err(Error::InvalidConfig("class1_fraction: must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

const LABEL_STREAM: u64 = 0x1abe;
const SAMPLE_STREAM: u64 = 0x5a3e;

/// Draws a dataset from `spec`; identical specs give identical datasets.
pub fn synth_generate(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.n_samples;
    let n_bands = spec.band_names.len();
    let ones = libm::round(n as f64 * spec.class1_fraction) as usize;
    let mut labels = vec![0u8; n - ones];
    labels.extend(core::iter::repeat(1u8).take(ones));
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[LABEL_STREAM])));

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[SAMPLE_STREAM]));
    let gain_dist = Uniform::new_inclusive(spec.gain_min, spec.gain_max)
        .map_err(|_| Error::InvalidConfig("gain range".into()))?;
    let mut values = Vec::with_capacity(n * n_bands);
    for &label in &labels {
        let mean = if label == 1 { &spec.class1_mean } else { &spec.class0_mean };
        let gain = gain_dist.sample(&mut rng);
        let shared: Vec<f64> = spec.variation_modes.iter().map(|_| StandardNormal.sample(&mut rng)).collect();
        for (k, &m) in mean.iter().enumerate() {
            let correlated: f64 = spec.variation_modes.iter().zip(&shared).map(|(mode, u)| u * mode[k]).sum();
            let z: f64 = StandardNormal.sample(&mut rng);
            let v = gain * m * (1.0 + correlated + spec.within_class_scale * z);
            values.push(v.max(MIN_REFLECTANCE));
        }
    }
    Dataset::new(spec.band_names.clone(), values, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SynthSpec {
        SynthSpec {
            n_samples: 200,
            band_names: Dataset::default_band_names(3),
            class0_mean: vec![0.05, 0.1, 0.3],
            class1_mean: vec![0.05, 0.08, 0.45],
            within_class_scale: 0.05,
            variation_modes: vec![vec![0.0, 0.1, 0.2]],
            gain_min: 0.5,
            gain_max: 2.0,
            class1_fraction: 0.5,
            seed: 17,
        }
    }

    #[test]
    fn degenerate_spec_reproduces_means() {
        let s = SynthSpec {
            within_class_scale: 0.0,
            variation_modes: Vec::new(),
            gain_min: 1.0,
            gain_max: 1.0,
            ..spec()
        };
        let ds = synth_generate(&s).unwrap();
        for (row, label) in ds.iter() {
            let mean = if label == 1 { &s.class1_mean } else { &s.class0_mean };
            assert_eq!(row, mean.as_slice());
        }
    }

    #[test]
    fn deterministic_and_positive() {
        let a = synth_generate(&spec()).unwrap();
        let b = synth_generate(&spec()).unwrap();
        assert_eq!(a, b);
        assert!(a.values().iter().all(|&v| v >= MIN_REFLECTANCE));
        assert_eq!(a.class_counts(), [100, 100]);
        let c = synth_generate(&SynthSpec { seed: 18, ..spec() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_fields_are_named() {
        let mut s = spec();
        s.class1_mean.pop();
        let err = synth_generate(&s).unwrap_err();
        assert!(format!("{err}").contains("class1_mean"));
        let s = SynthSpec { gain_min: 3.0, ..spec() };
        assert!(format!("{}", synth_generate(&s).unwrap_err()).contains("gain_min"));
        let mut s = spec();
        s.class0_mean[0] = 0.0;
        assert!(format!("{}", synth_generate(&s).unwrap_err()).contains("class0_mean"));
        let mut s = spec();
        s.variation_modes.push(vec![1.0]);
        assert!(format!("{}", synth_generate(&s).unwrap_err()).contains("variation_modes[1]"));
    }

    #[test]
    fn shared_mode_correlates_bands() {
        // one mode, no independent noise, no gain: band ratios stay on a line
        let s = SynthSpec {
            within_class_scale: 0.0,
            gain_min: 1.0,
            gain_max: 1.0,
            variation_modes: vec![vec![0.0, 0.1, 0.2]],
            ..spec()
        };
        let ds = synth_generate(&s).unwrap();
        for (row, label) in ds.iter() {
            let mean = if label == 1 { &s.class1_mean } else { &s.class0_mean };
            assert_eq!(row[0], mean[0]);
            let u1 = (row[1] / mean[1] - 1.0) / 0.1;
            let u2 = (row[2] / mean[2] - 1.0) / 0.2;
            assert!((u1 - u2).abs() < 1e-9);
        }
    }
}
