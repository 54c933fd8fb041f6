use alloc::string::String;

/// Errors reported by the core crate.
///
/// Shape and contract violations are returned rather than panicking so the
/// command-line layer can report them with context.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("negative input {value} at band {index}; use a signed-input variant")]
    NegativeInput { index: usize, value: f64 },
    #[error("non-finite input at position {index}")]
    NonFinite { index: usize },
    #[error("invalid band pair ({i}, {j}) for {n} bands")]
    InvalidPair { i: usize, j: usize, n: usize },
    #[error("unsupported depth {0}; expected 2, 3 or 4")]
    UnsupportedDepth(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("class {class} has {count} samples, at least {needed} required")]
    ClassTooSmall {
        class: u8,
        count: usize,
        needed: usize,
    },
    #[error("model has no normalized-difference first layer")]
    NotNdModel,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
