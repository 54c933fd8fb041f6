//! Datasets, stratified cross-validation splits, synthetic spectra and the
//! multiplicative noise model.

mod dataset;
mod noise;
mod split;
mod synth;

pub use dataset::Dataset;
pub use noise::inject_noise;
pub use split::{stratified_split, stratified_split_indices, SplitIndices, SplitSpec};
pub use synth::{synth_generate, SynthSpec};
