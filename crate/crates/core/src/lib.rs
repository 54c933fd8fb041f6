//! Learnable normalized-difference layer, the small dense networks built
//! around it, and the evaluation harness used to compare them.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is pure and
//! deterministic given its seeds; file formats, reports and the command line
//! live in the companion `ndlayer` crate.
//!
//! Module map:
//!
//! - [`math`]: stable softplus/sigmoid and a row-major dense matrix.
//! - [`nd`]: the normalized-difference layer, its signed-input variants and
//!   the attention gate, each with a hand-derived backward pass.
//! - [`net`]: dense layers, BCE loss, Adam, the three model families and
//!   the training loop with early stopping.
//! - [`data`]: datasets, stratified folds, synthetic spectra and the
//!   multiplicative noise model.
//! - [`eval`]: accuracy, efficiency, noise sweeps, coefficient ratios,
//!   finite-difference gradient checks and cross-validation.
#![no_std]
#![deny(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

pub mod data;
mod error;
pub mod eval;
pub mod math;
pub mod nd;
pub mod net;
mod seed;

pub use error::{Error, Result};
pub use seed::derive_seed;
