//! Plain-text decomposition model files.
//!
//! A model is one JSON document:
//!
//! ```json
//! {
//!   "format": "bellchain-model",
//!   "version": 1,
//!   "alpha": 0.8,
//!   "alice_angles": [0.0, 1.5707963267948966],
//!   "bob_angles": [0.7853981633974483, 2.356194490192345],
//!   "weights": [1.0],
//!   "boxes": [[0.64, 0.0, ...]]
//! }
//! ```
//!
//! Angles are radians; each box is a flat table of 4·N² probabilities in
//! (a, b, x, y) order. Serialization emits the shortest decimal that recovers
//! the identical f64, so write → read round-trips bit-exactly.

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::chained::ScenarioSettings;
use crate::decomposition::{BehaviorBox, DecompositionModel};
use crate::error::{Error, Result};
use crate::quantum::{EntangledPairState, MeasurementAngle};

pub const MODEL_FORMAT: &str = "bellchain-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    alpha: f64,
    alice_angles: Vec<f64>,
    bob_angles: Vec<f64>,
    weights: Vec<f64>,
    boxes: Vec<Vec<f64>>,
}

pub fn to_json_string(model: &DecompositionModel) -> String {
    let file = ModelFile {
        format: MODEL_FORMAT.to_owned(),
        version: MODEL_VERSION,
        alpha: model.state().alpha(),
        alice_angles: model
            .settings()
            .alice_angles()
            .iter()
            .map(|a| a.theta())
            .collect(),
        bob_angles: model
            .settings()
            .bob_angles()
            .iter()
            .map(|a| a.theta())
            .collect(),
        weights: model.weights().to_vec(),
        boxes: model.boxes().iter().map(|b| b.entries().to_vec()).collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
    text.push('\n');
    text
}

pub fn from_json_str(text: &str) -> Result<DecompositionModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::ModelParse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.format != MODEL_FORMAT {
        return Err(Error::ModelSchema(format!(
            "format {:?} is not {MODEL_FORMAT:?}",
            file.format
        )));
    }
    if file.version != MODEL_VERSION {
        return Err(Error::ModelSchema(format!(
            "unsupported version {} (expected {MODEL_VERSION})",
            file.version
        )));
    }
    let schema = |e: Error| Error::ModelSchema(e.to_string());
    let state = EntangledPairState::new(file.alpha).map_err(schema)?;
    for &theta in file.alice_angles.iter().chain(&file.bob_angles) {
        if !theta.is_finite() {
            return Err(Error::ModelSchema(format!("non-finite angle {theta}")));
        }
    }
    let settings = ScenarioSettings::new(
        file.alice_angles.into_iter().map(MeasurementAngle::new).collect(),
        file.bob_angles.into_iter().map(MeasurementAngle::new).collect(),
    )
    .map_err(schema)?;
    let n = settings.n();
    let boxes = file
        .boxes
        .into_iter()
        .map(|entries| BehaviorBox::new(n, n, entries).map_err(schema))
        .collect::<Result<Vec<_>>>()?;
    DecompositionModel::new(state, settings, file.weights, boxes).map_err(schema)
}

pub fn write_model(path: &Path, model: &DecompositionModel) -> Result<()> {
    fs::write(path, to_json_string(model))?;
    Ok(())
}

pub fn read_model(path: &Path) -> Result<DecompositionModel> {
    from_json_str(&fs::read_to_string(path)?)
}
