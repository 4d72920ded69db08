//! Classifiers, metrics, hyperparameter search and nested cross-validation.

pub mod cv;
pub mod forest;
pub mod logistic;
pub mod metrics;
pub mod model_io;
pub mod scale;
pub mod search;

use serde::{Deserialize, Serialize};

pub use cv::{nested_cv, CvParams, CvReport};
pub use forest::{DecisionTree, MaxFeatures, RandomForest, RfHyper};
pub use logistic::{LogisticModel, LrHyper};
pub use metrics::{auroc, roc_curve, Confusion, Metrics, RocPoint};
pub use model_io::StoredModel;
pub use scale::Standardizer;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Lr,
    Rf,
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ClassifierKind::Lr => "lr",
            ClassifierKind::Rf => "rf",
        })
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" => Ok(ClassifierKind::Lr),
            "rf" => Ok(ClassifierKind::Rf),
            _ => Err(Error::InvalidInput(format!(
                "unknown classifier `{s}` (expected lr or rf)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hyper {
    Lr(LrHyper),
    Rf(RfHyper),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classifier {
    Lr(LogisticModel),
    Rf(RandomForest),
}

impl Classifier {
    /// Fits on standardized rows.
    pub fn fit(x: &[Vec<f64>], y: &[u8], hyper: &Hyper) -> Result<Classifier> {
        match hyper {
            Hyper::Lr(h) => LogisticModel::fit(x, y, h).map(Classifier::Lr),
            Hyper::Rf(h) => RandomForest::fit(x, y, h).map(Classifier::Rf),
        }
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        match self {
            Classifier::Lr(m) => m.predict_proba(row),
            Classifier::Rf(m) => m.predict_proba(row),
        }
    }
}
