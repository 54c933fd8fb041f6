use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamConfig, AdamState};
use super::loss::bce_with_logits;
use super::model::{Model, ModelGrads};
use crate::data::Dataset;
use crate::nd::Epsilon;
use crate::{derive_seed, Error, Result};

const SHUFFLE_STREAM: u64 = 0x54ff;

/// Optimizer and early-stopping settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    /// ND stability constant used when building models.
    pub eps: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    /// Apply weight decay AdamW-style instead of as an L2 gradient term.
    pub decoupled_weight_decay: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        Self {
            lr: adam.lr,
            weight_decay: adam.weight_decay,
            batch_size: 32,
            max_epochs: 150,
            patience: 25,
            seed: 0,
            eps: Epsilon::DEFAULT,
            beta1: adam.beta1,
            beta2: adam.beta2,
            adam_eps: adam.eps,
            decoupled_weight_decay: adam.decoupled,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lr", self.lr),
            ("eps", self.eps),
            ("adam_eps", self.adam_eps),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::InvalidConfig("weight_decay must be nonnegative".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::InvalidConfig("Adam betas must lie in [0, 1)".into()));
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::InvalidConfig(
                "batch_size, max_epochs and patience must be positive".into(),
            ));
        }
        if self.patience > self.max_epochs {
            return Err(Error::InvalidConfig("patience must not exceed max_epochs".into()));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.adam_eps,
            weight_decay: self.weight_decay,
            decoupled: self.decoupled_weight_decay,
        }
    }

    pub fn epsilon(&self) -> Result<Epsilon> {
        Epsilon::new(self.eps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were returned.
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    /// Last epoch that ran.
    pub stopped_epoch: usize,
    pub early_stopped: bool,
}

impl TrainHistory {
    pub fn max_val_accuracy(&self) -> f64 {
        self.epochs.iter().map(|e| e.val_accuracy).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Mean loss and accuracy of `model` on `ds`.
pub(crate) fn loss_and_accuracy(model: &Model, ds: &Dataset) -> Result<(f64, f64)> {
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (row, label) in ds.iter() {
        let logit = model.logit(row)?;
        loss += bce_with_logits(logit, label).0;
        correct += usize::from(u8::from(logit > 0.0) == label);
    }
    let n = ds.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

/// Mini-batch Adam on BCE with early stopping on validation accuracy.
///
/// The training order is reshuffled every epoch from `config.seed`; the
/// last partial batch is used. An epoch counts as an improvement only if it
/// strictly beats the best validation accuracy so far, and training stops
/// after `patience` epochs without one. The parameters of the best epoch
/// are returned.
pub fn train(mut model: Model, train_set: &Dataset, val_set: &Dataset, config: &TrainConfig) -> Result<(Model, TrainHistory)> {
    config.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for ds in [train_set, val_set] {
        if ds.n_bands() != model.n_bands() {
            return Err(Error::DimensionMismatch {
                context: "dataset bands",
                expected: model.n_bands(),
                found: ds.n_bands(),
            });
        }
    }

    let adam = config.adam();
    let sizes: Vec<usize> = model.param_groups().iter().map(|g| g.values.len()).collect();
    let mut state = AdamState::new(&sizes);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[SHUFFLE_STREAM]));
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    let mut epochs = Vec::new();
    let mut best = (model.clone(), f64::NEG_INFINITY, 0usize);
    let mut since_best = 0usize;
    let mut early_stopped = false;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grads = ModelGrads::zeros_like(&model);
            for &i in batch {
                let (logit, cache) = model.forward(train_set.row(i))?;
                let (loss, dlogit) = bce_with_logits(logit, train_set.label(i));
                loss_sum += loss;
                grads.add_assign(&model.backward(&cache, dlogit)?);
            }
            grads.scale(1.0 / batch.len() as f64);
            let grad_slices = grads.as_slices();
            adam_step(&mut model.param_groups_mut(), &grad_slices, &mut state, &adam)?;
        }

        let (val_loss, val_accuracy) = loss_and_accuracy(&model, val_set)?;
        epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            val_loss,
            val_accuracy,
        });
        if val_accuracy > best.1 {
            best = (model.clone(), val_accuracy, epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                early_stopped = true;
                break;
            }
        }
    }

    let stopped_epoch = epochs.len();
    let (best_model, best_val_accuracy, best_epoch) = best;
    Ok((
        best_model,
        TrainHistory {
            epochs,
            best_epoch,
            best_val_accuracy,
            stopped_epoch,
            early_stopped,
        },
    ))
}
