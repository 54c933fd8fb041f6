use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Band vectors with binary labels.
///
/// Rows are stored row-major in one buffer. Datasets built with
/// [`Dataset::new`] hold finite, nonnegative reflectances; noisy copies made
/// by [`inject_noise`](super::inject_noise) are only guaranteed finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    band_names: Vec<String>,
    values: Vec<f64>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(band_names: Vec<String>, values: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        let ds = Self::from_parts_finite(band_names, values, labels)?;
        if let Some(pos) = ds.values.iter().position(|&v| v < 0.0) {
            return Err(Error::NegativeInput {
                index: pos % ds.n_bands(),
                value: ds.values[pos],
            });
        }
        Ok(ds)
    }

    /// Like [`Dataset::new`] but allows negative values.
    pub fn from_parts_finite(band_names: Vec<String>, values: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if band_names.is_empty() {
            return Err(Error::InvalidConfig("dataset needs at least one band".into()));
        }
        let n = band_names.len();
        if values.len() != labels.len() * n {
            return Err(Error::DimensionMismatch {
                context: "dataset values",
                expected: labels.len() * n,
                found: values.len(),
            });
        }
        if let Some(row) = labels.iter().position(|&l| l > 1) {
            return Err(Error::InvalidConfig(format!(
                "label {} in row {row} is not 0 or 1",
                labels[row]
            )));
        }
        if let Some(index) = crate::math::first_non_finite(&values) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            band_names,
            values,
            labels,
        })
    }

    /// Names `band_1 … band_n`.
    pub fn default_band_names(n: usize) -> Vec<String> {
        (1..=n).map(|k| format!("band_{k}")).collect()
    }

    pub fn band_names(&self) -> &[String] {
        &self.band_names
    }

    pub fn n_bands(&self) -> usize {
        self.band_names.len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_bands();
        &self.values[i * n..(i + 1) * n]
    }

    #[inline]
    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], u8)> + '_ {
        self.values
            .chunks_exact(self.n_bands())
            .zip(self.labels.iter().copied())
    }

    /// `[count of label 0, count of label 1]`.
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.len() - ones, ones]
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.n_bands());
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self {
            band_names: self.band_names.clone(),
            values,
            labels,
        }
    }

    /// Same rows with every label flipped.
    pub fn with_flipped_labels(&self) -> Self {
        Self {
            band_names: self.band_names.clone(),
            values: self.values.clone(),
            labels: self.labels.iter().map(|l| 1 - l).collect(),
        }
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            band_names: self.band_names.clone(),
            values,
            labels: self.labels.clone(),
        }
    }
}
