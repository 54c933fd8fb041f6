//! Metrics, robustness sweeps, coefficient interpretation, gradient checks
//! and cross-validation.

mod coeffs;
mod crossval;
mod gradcheck;
mod metrics;

pub use coeffs::{coeff_ratios, AsymmetricPair, CoeffRatioMatrix};
pub use crossval::{
    fold_noise_seed, initial_model, run_crossval, run_fold, CrossvalConfig, EvalReport, FoldResult, FoldSummary, NoiseSummary, DEFAULT_ETAS,
    DEGRADATION_ETA,
};
pub use gradcheck::{
    gradcheck, gradcheck_attention, gradcheck_layer, FamilyReport, GradFamily, GradcheckConfig,
    GradcheckReport, Stencil, REL_ERR_FLOOR,
};
pub use metrics::{accuracy, efficiency, noise_seed, noise_sweep, sample_std, NoisePoint};
