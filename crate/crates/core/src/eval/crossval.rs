use alloc::vec::Vec;

use super::metrics::{accuracy, efficiency, noise_sweep, sample_std, NoisePoint};
use crate::data::{stratified_split, Dataset, SplitSpec};
use crate::net::{train, Arch, Model, TrainConfig, TrainHistory};
use crate::{derive_seed, Error, Result};

const INIT_STREAM: u64 = 0x1417;
const TRAIN_STREAM: u64 = 0x7a19;
const FOLD_NOISE_STREAM: u64 = 0xf01d;

/// Noise level whose accuracy drop is reported as the degradation.
pub const DEGRADATION_ETA: f64 = 0.10;

/// Levels swept by default: 0 to 10% in steps of 2%.
pub const DEFAULT_ETAS: [f64; 6] = [0.0, 0.02, 0.04, 0.06, 0.08, 0.10];

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossvalConfig {
    pub train: TrainConfig,
    pub split: SplitSpec,
    /// Sorted noise levels; must contain 0 and [`DEGRADATION_ETA`].
    pub etas: Vec<f64>,
}

impl CrossvalConfig {
    /// Default protocol with every stream seeded from `seed`.
    pub fn new(seed: u64) -> Self {
        Self {
            train: TrainConfig {
                seed,
                ..TrainConfig::default()
            },
            split: SplitSpec::new(seed),
            etas: DEFAULT_ETAS.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.split.validate()?;
        if !self.etas.contains(&0.0) || !self.etas.contains(&DEGRADATION_ETA) {
            return Err(Error::InvalidConfig("noise levels must include 0 and 0.1".into()));
        }
        Ok(())
    }
}

/// Everything produced by one fold, including the restored model.
#[derive(Debug, Clone)]
pub struct FoldResult {
    pub fold: usize,
    pub test_accuracy: f64,
    /// Validation accuracy re-measured on the returned model.
    pub restored_val_accuracy: f64,
    pub history: TrainHistory,
    pub noise: Vec<NoisePoint>,
    pub model: Model,
}

impl FoldResult {
    /// Clean minus `η = 0.10` accuracy, in percentage points.
    pub fn degradation_pct(&self) -> f64 {
        100.0 * self.accuracy_at(0.0) - 100.0 * self.accuracy_at(DEGRADATION_ETA)
    }

    fn accuracy_at(&self, eta: f64) -> f64 {
        self.noise
            .iter()
            .find(|p| p.eta == eta)
            .map_or(f64::NAN, |p| p.accuracy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseSummary {
    pub eta: f64,
    pub accuracy_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FoldSummary {
    pub fold: usize,
    pub test_accuracy_pct: f64,
    pub best_val_accuracy_pct: f64,
    pub restored_val_accuracy_pct: f64,
    pub best_epoch: usize,
    pub stopped_epoch: usize,
    pub noise: Vec<NoiseSummary>,
    pub degradation_pct: f64,
}

/// Aggregate cross-validation results for one architecture and depth.
///
/// Accuracies are percentages; the aggregate is the mean of the per-fold
/// test accuracies with the sample standard deviation across folds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub arch: Arch,
    pub depth: usize,
    pub n_bands: usize,
    pub param_count: usize,
    pub folds: Vec<FoldSummary>,
    pub mean_accuracy_pct: f64,
    pub std_accuracy_pct: f64,
    pub efficiency: f64,
    /// Mean accuracy over folds at each noise level.
    pub noise: Vec<NoiseSummary>,
    pub mean_degradation_pct: f64,
}

impl EvalReport {
    /// Assembles a report; folds may arrive in any order.
    pub fn from_folds(arch: Arch, depth: usize, folds: &[FoldResult]) -> Result<Self> {
        let first = folds.first().ok_or(Error::EmptyDataset)?;
        let mut sorted: Vec<&FoldResult> = folds.iter().collect();
        sorted.sort_by_key(|f| f.fold);

        let summaries: Vec<FoldSummary> = sorted
            .iter()
            .map(|f| FoldSummary {
                fold: f.fold,
                test_accuracy_pct: 100.0 * f.test_accuracy,
                best_val_accuracy_pct: 100.0 * f.history.best_val_accuracy,
                restored_val_accuracy_pct: 100.0 * f.restored_val_accuracy,
                best_epoch: f.history.best_epoch,
                stopped_epoch: f.history.stopped_epoch,
                noise: f
                    .noise
                    .iter()
                    .map(|p| NoiseSummary {
                        eta: p.eta,
                        accuracy_pct: 100.0 * p.accuracy,
                    })
                    .collect(),
                degradation_pct: f.degradation_pct(),
            })
            .collect();

        let n = summaries.len() as f64;
        let accuracies: Vec<f64> = summaries.iter().map(|s| s.test_accuracy_pct).collect();
        let mean_accuracy_pct = accuracies.iter().sum::<f64>() / n;
        let mut noise: Vec<NoiseSummary> = first
            .noise
            .iter()
            .map(|p| NoiseSummary {
                eta: p.eta,
                accuracy_pct: 0.0,
            })
            .collect();
        for s in &summaries {
            if s.noise.len() != noise.len() {
                return Err(Error::InvalidConfig("folds swept different noise levels".into()));
            }
            for (acc, p) in noise.iter_mut().zip(&s.noise) {
                acc.accuracy_pct += p.accuracy_pct / n;
            }
        }
        let param_count = first.model.param_count();
        Ok(Self {
            arch,
            depth,
            n_bands: first.model.n_bands(),
            param_count,
            mean_accuracy_pct,
            std_accuracy_pct: sample_std(&accuracies),
            efficiency: efficiency(mean_accuracy_pct, param_count),
            noise,
            mean_degradation_pct: summaries.iter().map(|s| s.degradation_pct).sum::<f64>() / n,
            folds: summaries,
        })
    }
}

/// Base seed of the noise sweep for fold `fold` under training seed `seed`.
pub fn fold_noise_seed(seed: u64, fold: usize) -> u64 {
    derive_seed(seed, &[FOLD_NOISE_STREAM, fold as u64])
}

/// The untrained model that [`run_fold`] starts from.
pub fn initial_model(arch: Arch, depth: usize, n_bands: usize, cfg: &CrossvalConfig, fold: usize) -> Result<Model> {
    let seed = derive_seed(cfg.train.seed, &[INIT_STREAM, fold as u64]);
    Model::build(arch, depth, n_bands, seed, cfg.train.epsilon()?)
}

/// Trains and evaluates fold `fold`.
///
/// Initialization, shuffling and noise seeds derive from the training seed
/// and the fold index only, so different architectures at the same fold
/// are tested on identical noisy inputs.
pub fn run_fold(arch: Arch, depth: usize, ds: &Dataset, cfg: &CrossvalConfig, fold: usize) -> Result<FoldResult> {
    cfg.validate()?;
    let (train_set, val_set, test_set) = stratified_split(ds, &cfg.split, fold)?;
    let base = cfg.train.seed;
    let model = initial_model(arch, depth, ds.n_bands(), cfg, fold)?;
    let train_cfg = TrainConfig {
        seed: derive_seed(base, &[TRAIN_STREAM, fold as u64]),
        ..cfg.train
    };
    let (model, history) = train(model, &train_set, &val_set, &train_cfg)?;
    let restored_val_accuracy = accuracy(&model, &val_set)?;
    let noise = noise_sweep(&model, &test_set, &cfg.etas, fold_noise_seed(base, fold))?;
    Ok(FoldResult {
        fold,
        test_accuracy: accuracy(&model, &test_set)?,
        restored_val_accuracy,
        history,
        noise,
        model,
    })
}

/// Runs every fold sequentially and aggregates the results.
pub fn run_crossval(arch: Arch, depth: usize, ds: &Dataset, cfg: &CrossvalConfig) -> Result<(EvalReport, Vec<FoldResult>)> {
    cfg.validate()?;
    let folds = (0..cfg.split.folds)
        .map(|fold| run_fold(arch, depth, ds, cfg, fold))
        .collect::<Result<Vec<_>>>()?;
    Ok((EvalReport::from_folds(arch, depth, &folds)?, folds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth_generate, SynthSpec};
    use alloc::vec;

    fn quick_config(seed: u64) -> CrossvalConfig {
        let mut cfg = CrossvalConfig::new(seed);
        cfg.train.max_epochs = 5;
        cfg.train.patience = 5;
        cfg.split.folds = 5;
        cfg.split.test = 0.2;
        cfg.split.train = 0.6;
        cfg
    }

    fn small_data() -> Dataset {
        let spec = SynthSpec {
            n_samples: 120,
            band_names: vec!["a".into(), "b".into(), "c".into()],
            class0_mean: vec![0.1, 0.2, 0.3],
            class1_mean: vec![0.3, 0.2, 0.1],
            within_class_scale: 0.1,
            variation_modes: Vec::new(),
            gain_min: 0.5,
            gain_max: 2.0,
            class1_fraction: 0.5,
            seed: 3,
        };
        synth_generate(&spec).unwrap()
    }

    #[test]
    fn report_aggregates_folds() {
        let ds = small_data();
        let (report, folds) = run_crossval(Arch::Nd, 2, &ds, &quick_config(1)).unwrap();
        assert_eq!(report.folds.len(), 5);
        assert_eq!(report.param_count, 3 * 2 + 3 + 1);
        let mean = report.folds.iter().map(|f| f.test_accuracy_pct).sum::<f64>() / 5.0;
        assert_eq!(report.mean_accuracy_pct, mean);
        for (f, s) in folds.iter().zip(&report.folds) {
            assert_eq!(f.noise[0].accuracy, f.test_accuracy);
            assert_eq!(s.restored_val_accuracy_pct, s.best_val_accuracy_pct);
        }
    }

    #[test]
    fn order_of_folds_does_not_matter() {
        let ds = small_data();
        let cfg = quick_config(2);
        let mut folds: Vec<FoldResult> = (0..5).map(|k| run_fold(Arch::Mlp, 2, &ds, &cfg, k).unwrap()).collect();
        let forward = EvalReport::from_folds(Arch::Mlp, 2, &folds).unwrap();
        folds.reverse();
        assert_eq!(EvalReport::from_folds(Arch::Mlp, 2, &folds).unwrap(), forward);
    }

    #[test]
    fn missing_degradation_level_is_rejected() {
        let mut cfg = quick_config(0);
        cfg.etas = vec![0.0, 0.05];
        assert!(run_fold(Arch::Nd, 2, &small_data(), &cfg, 0).is_err());
    }
}
