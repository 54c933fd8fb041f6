use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::{derive_seed, Error, Result};

const SPLIT_STREAM: u64 = 0x5b17;

/// Train/validation/test proportions and fold count for stratified
/// cross-validation.
///
/// Each fold's test part is one of `folds` round-robin deals, so `test` must
/// equal `1 / folds`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitSpec {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
    pub folds: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            train: 0.7,
            validation: 0.2,
            test: 0.1,
            folds: 10,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fractions = [self.train, self.validation, self.test];
        if fractions.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::InvalidConfig("split fractions must be positive".into()));
        }
        if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig("split fractions must sum to 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidConfig("fold count must be at least 2".into()));
        }
        if (self.test * self.folds as f64 - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "test fraction {} does not match 1/{} folds",
                self.test, self.folds
            )));
        }
        Ok(())
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self::new(0)
    }
}

/// Row indices of one fold's three parts, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Computes the rows of fold `fold`.
///
/// Each class is shuffled independently from the seed and dealt round-robin
/// into `folds` groups (the deal continues across classes). The fold's group
/// is the test part; the rest of each class, in dealt order, is cut into
/// train and validation so every part's per-class count is within one sample
/// of its exact share.
pub fn stratified_split_indices(ds: &Dataset, spec: &SplitSpec, fold: usize) -> Result<SplitIndices> {
    spec.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if fold >= spec.folds {
        return Err(Error::InvalidConfig(format!(
            "fold {fold} out of range for {} folds",
            spec.folds
        )));
    }
    let mut out = SplitIndices {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
    };
    let inner_share = spec.train / (spec.train + spec.validation);
    let mut dealt = 0usize;
    for class in 0u8..2 {
        let mut members: Vec<usize> = (0..ds.len()).filter(|&i| ds.label(i) == class).collect();
        if members.len() < spec.folds {
            return Err(Error::ClassTooSmall {
                class,
                count: members.len(),
                needed: spec.folds,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[SPLIT_STREAM, u64::from(class)]));
        members.shuffle(&mut rng);

        let mut rest = Vec::with_capacity(members.len());
        for &idx in &members {
            if dealt % spec.folds == fold {
                out.test.push(idx);
            } else {
                rest.push(idx);
            }
            dealt += 1;
        }
        let n = members.len() as f64;
        let k = train_count(rest.len(), n * spec.train, n * spec.validation, inner_share);
        out.train.extend_from_slice(&rest[..k]);
        out.validation.extend_from_slice(&rest[k..]);
    }
    out.train.sort_unstable();
    out.validation.sort_unstable();
    out.test.sort_unstable();
    Ok(out)
}

/// Picks how many of `rest` go to training: closest to the inner ratio while
/// keeping both parts within one sample of their exact targets.
fn train_count(rest: usize, train_target: f64, val_target: f64, inner_share: f64) -> usize {
    let ideal = rest as f64 * inner_share;
    let base = libm::floor(ideal) as i64;
    let mut best: Option<(f64, usize)> = None;
    for k in (base - 2)..=(base + 3) {
        if k < 0 || k as usize > rest {
            continue;
        }
        let kf = k as f64;
        if (kf - train_target).abs() > 1.0 || ((rest as f64 - kf) - val_target).abs() > 1.0 {
            continue;
        }
        let dist = (kf - ideal).abs();
        if best.map_or(true, |(d, _)| dist < d) {
            best = Some((dist, k as usize));
        }
    }
    best.map_or_else(|| libm::round(ideal) as usize, |(_, k)| k.min(rest))
}

/// Materializes fold `fold` as `(train, validation, test)` datasets.
pub fn stratified_split(ds: &Dataset, spec: &SplitSpec, fold: usize) -> Result<(Dataset, Dataset, Dataset)> {
    let idx = stratified_split_indices(ds, spec, fold)?;
    Ok((ds.subset(&idx.train), ds.subset(&idx.validation), ds.subset(&idx.test)))
}
