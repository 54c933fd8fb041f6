//! Dense layers, loss, optimizer, the three model families and training.

mod adam;
mod dense;
mod loss;
mod model;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use dense::{dense_backward, dense_forward, Activation, DenseCache, DenseGradients, DenseLayer};
pub use loss::bce_with_logits;
pub use model::{
    build_model, count_params, model_backward, model_forward, Arch, FrontCache, FrontLayer,
    InputPolicy, Model, ModelCache, ModelGrads, ParamFamily, ParamGroup, MAX_DEPTH, MIN_DEPTH,
};
pub use train::{train, EpochRecord, TrainConfig, TrainHistory};
