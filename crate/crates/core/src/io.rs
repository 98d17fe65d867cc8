//! Versioned JSON model files.
//!
//! Floats are written as shortest round-trip decimals and parsed with
//! correct rounding, so a save/load cycle reproduces every bit.

use serde::{Deserialize, Serialize};

use crate::error::{FelmError, Result};
use crate::fuzzy::{AntecedentGrid, It2Gaussian};
use crate::train::{ElmModel, Model, Trainer};
use crate::tsk::TskModel;

pub const MODEL_FORMAT: &str = "felm-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    /// Trainer that produced the model, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trainer: Option<Trainer>,
    pub model: Model,
}

impl ModelFile {
    pub fn new(model: Model, trainer: Option<Trainer>) -> Self {
        Self { format: MODEL_FORMAT.into(), version: MODEL_VERSION, trainer, model }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| FelmError::Format(e.to_string()))
    }

    /// Parses and re-validates a model file; fields are not trusted.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| FelmError::Format(e.to_string()))?;
        if file.format != MODEL_FORMAT {
            return Err(FelmError::Format(format!("expected format `{MODEL_FORMAT}`, found `{}`", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(FelmError::Format(format!("unsupported model version {} (this build reads {MODEL_VERSION})", file.version)));
        }
        let model = match file.model {
            Model::Tsk(m) => Model::Tsk(revalidate_tsk(&m)?),
            Model::Elm(m) => Model::Elm(revalidate_elm(m)?),
        };
        Ok(Self { model, ..file })
    }
}

fn revalidate_tsk(m: &TskModel) -> Result<TskModel> {
    let rows = m
        .antecedents()
        .rows()
        .iter()
        .map(|row| row.iter().map(|mf| It2Gaussian::new(mf.mean(), mf.sigma_lo(), mf.sigma_hi())).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    TskModel::new(AntecedentGrid::new(rows)?, m.consequents().to_vec(), m.bias(), m.reducer())
}

fn revalidate_elm(m: ElmModel) -> Result<ElmModel> {
    let n = m.inputs();
    let hidden = m.input_weights.len();
    if n == 0 || hidden == 0 {
        return Err(FelmError::Format("ELM model has no hidden units or inputs".into()));
    }
    if let Some(row) = m.input_weights.iter().find(|r| r.len() != n) {
        return Err(FelmError::DimensionMismatch { expected: n, got: row.len() });
    }
    for len in [m.biases.len(), m.output_weights.len()] {
        if len != hidden {
            return Err(FelmError::DimensionMismatch { expected: hidden, got: len });
        }
    }
    if m.input_weights.iter().flatten().chain(&m.biases).chain(&m.output_weights).any(|v| !v.is_finite()) {
        return Err(FelmError::NonFinite("ELM weights"));
    }
    Ok(m)
}

pub fn save_model(model: &Model, trainer: Option<Trainer>) -> Result<String> {
    ModelFile::new(model.clone(), trainer).to_json()
}

pub fn load_model(text: &str) -> Result<Model> {
    ModelFile::from_json(text).map(|f| f.model)
}

/// Pretty JSON for any report type.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| FelmError::Format(e.to_string()))
}
