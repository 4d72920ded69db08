//! Stored-model container (versioned JSON).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scale::Standardizer;
use super::{Classifier, ClassifierKind, Hyper};
use crate::error::{Error, Result};
use crate::pipeline::{FeatureMatrix, ModelKind};

pub const FORMAT: &str = "oxiscreen-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredModel {
    pub format: String,
    pub version: u32,
    pub model_kind: ModelKind,
    pub classifier_kind: ClassifierKind,
    pub hyper: Hyper,
    /// Columns of the feature table the model was trained from.
    pub input_columns: Vec<String>,
    /// Selected columns, in the order the classifier sees them.
    pub features: Vec<String>,
    pub standardizer: Standardizer,
    pub classifier: Classifier,
}

impl StoredModel {
    pub fn new(
        model_kind: ModelKind,
        hyper: Hyper,
        input_columns: Vec<String>,
        features: Vec<String>,
        standardizer: Standardizer,
        classifier: Classifier,
    ) -> StoredModel {
        StoredModel {
            format: FORMAT.into(),
            version: FORMAT_VERSION,
            model_kind,
            classifier_kind: match hyper {
                Hyper::Lr(_) => ClassifierKind::Lr,
                Hyper::Rf(_) => ClassifierKind::Rf,
            },
            hyper,
            input_columns,
            features,
            standardizer,
            classifier,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::ModelFile(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<StoredModel> {
        let m: StoredModel = serde_json::from_str(text).map_err(|e| Error::ModelFile(e.to_string()))?;
        if m.format != FORMAT || m.version != FORMAT_VERSION {
            return Err(Error::ModelFile(format!(
                "unsupported container {} v{} (expected {FORMAT} v{FORMAT_VERSION})",
                m.format, m.version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<StoredModel> {
        StoredModel::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Probability for one row already restricted to `features`.
    pub fn predict_selected(&self, row: &[f64]) -> f64 {
        self.classifier.predict_proba(&self.standardizer.transform_row(row))
    }

    /// Window probabilities for a feature table with the training columns.
    pub fn predict(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        if matrix.columns != self.input_columns {
            let first = matrix
                .columns
                .iter()
                .zip(&self.input_columns)
                .position(|(a, b)| a != b)
                .unwrap_or(matrix.columns.len().min(self.input_columns.len()));
            return Err(Error::ModelFile(format!(
                "feature table columns do not match the model ({} vs {} columns, first difference at position {first})",
                matrix.columns.len(),
                self.input_columns.len()
            )));
        }
        let selected = matrix.select_columns(&self.features)?;
        Ok(selected.rows.iter().map(|r| self.predict_selected(&r.values)).collect())
    }
}
