//! Self-describing JSON checkpoints.
//!
//! Parameters are stored in the model's declared group order. Floats are
//! written in shortest round-trip form and parsed exactly, so a saved model
//! reloads bit for bit.

use std::path::Path;

use ndlayer_core::nd::Epsilon;
use ndlayer_core::net::{Arch, Model};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::run::{read_json, write_json, RunMeta};

pub const FORMAT: &str = "ndlayer-checkpoint";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamArray {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

/// Where a trained checkpoint came from, so a later noise sweep can rebuild
/// the same test split and noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    pub seed: u64,
    pub fold: usize,
    pub folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<RunMeta>,
    pub arch: Arch,
    pub depth: usize,
    pub band_names: Vec<String>,
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Origin>,
    pub params: Vec<ParamArray>,
}

impl Checkpoint {
    pub fn from_model(model: &Model, band_names: &[String]) -> Result<Self> {
        if band_names.len() != model.n_bands() {
            return Err(ndlayer_core::Error::DimensionMismatch {
                context: "checkpoint band names",
                expected: model.n_bands(),
                found: band_names.len(),
            }
            .into());
        }
        Ok(Self {
            format: FORMAT.to_string(),
            format_version: FORMAT_VERSION,
            meta: None,
            arch: model.arch(),
            depth: model.depth(),
            band_names: band_names.to_vec(),
            eps: model.eps().value(),
            origin: None,
            params: model
                .param_groups()
                .iter()
                .map(|g| ParamArray {
                    name: g.label(),
                    rows: g.rows,
                    cols: g.cols,
                    values: g.values.to_vec(),
                })
                .collect(),
        })
    }

    pub fn with_meta(mut self, meta: RunMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = Some(origin);
        self
    }

    /// Rebuilds the model, checking group names and shapes.
    pub fn to_model(&self) -> Result<Model> {
        let eps = Epsilon::new(self.eps)?;
        let template = Model::build(self.arch, self.depth, self.band_names.len(), 0, eps)?;
        let expected = template.param_groups();
        if expected.len() != self.params.len() {
            return Err(invalid(format!(
                "checkpoint has {} parameter groups, {} {} expects {}",
                self.params.len(),
                self.arch,
                self.depth,
                expected.len()
            )));
        }
        for (want, got) in expected.iter().zip(&self.params) {
            if want.label() != got.name || want.rows != got.rows || want.cols != got.cols {
                return Err(invalid(format!(
                    "parameter group {} ({}×{}) does not match expected {} ({}×{})",
                    got.name,
                    got.rows,
                    got.cols,
                    want.label(),
                    want.rows,
                    want.cols
                )));
            }
        }
        let groups: Vec<Vec<f64>> = self.params.iter().map(|p| p.values.clone()).collect();
        Ok(Model::from_param_groups(
            self.arch,
            self.depth,
            self.band_names.len(),
            eps,
            &groups,
        )?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ckpt: Checkpoint = read_json(path)?;
        if ckpt.format != FORMAT || ckpt.format_version != FORMAT_VERSION {
            return Err(CliError::format(
                path,
                format!(
                    "unsupported checkpoint format {} v{}",
                    ckpt.format, ckpt.format_version
                ),
            ));
        }
        Ok(ckpt)
    }
}

fn invalid(message: String) -> CliError {
    ndlayer_core::Error::InvalidConfig(message).into()
}
