//! Hyperparameter grids and random search sampling.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::forest::{MaxFeatures, RfHyper};
use super::logistic::LrHyper;
use super::{ClassifierKind, Hyper};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RfGrid {
    pub n_estimators: Vec<usize>,
    pub max_features: Vec<MaxFeatures>,
    pub max_depth: Vec<usize>,
    pub min_samples_split: Vec<usize>,
    pub min_samples_leaf: Vec<usize>,
    pub bootstrap: Vec<bool>,
}

impl Default for RfGrid {
    fn default() -> Self {
        RfGrid {
            n_estimators: vec![100, 110, 120, 150, 200, 250, 300],
            max_features: vec![MaxFeatures::All, MaxFeatures::Sqrt],
            max_depth: (1..=11).map(|d| d * 10).collect(),
            min_samples_split: vec![2, 5, 10],
            min_samples_leaf: vec![1, 2, 4],
            bootstrap: vec![true, false],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LrGrid {
    /// Learning rates are drawn log-uniformly from this range.
    pub learning_rate_min: f64,
    pub learning_rate_max: f64,
    pub l2: Vec<f64>,
    pub max_epochs: usize,
    pub tolerance: f64,
}

impl Default for LrGrid {
    fn default() -> Self {
        LrGrid {
            learning_rate_min: 1e-7,
            learning_rate_max: 1e-1,
            l2: vec![0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0],
            max_epochs: 300,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grid {
    pub rf: RfGrid,
    pub lr: LrGrid,
}

fn pick<T: Copy, R: Rng>(values: &[T], rng: &mut R) -> T {
    *values.choose(rng).expect("grid lists must be non-empty")
}

impl Grid {
    pub fn validate(&self) -> crate::Result<()> {
        let rf = &self.rf;
        let empty = rf.n_estimators.is_empty()
            || rf.max_features.is_empty()
            || rf.max_depth.is_empty()
            || rf.min_samples_split.is_empty()
            || rf.min_samples_leaf.is_empty()
            || rf.bootstrap.is_empty()
            || self.lr.l2.is_empty();
        if empty {
            return Err(crate::Error::Config("every grid list needs at least one value".into()));
        }
        if !(self.lr.learning_rate_min > 0.0 && self.lr.learning_rate_min <= self.lr.learning_rate_max) {
            return Err(crate::Error::Config(
                "learning-rate range must satisfy 0 < min <= max".into(),
            ));
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, kind: ClassifierKind, rng: &mut R) -> Hyper {
        match kind {
            ClassifierKind::Rf => {
                let g = &self.rf;
                Hyper::Rf(RfHyper {
                    n_estimators: pick(&g.n_estimators, rng),
                    max_features: pick(&g.max_features, rng),
                    max_depth: pick(&g.max_depth, rng),
                    min_samples_split: pick(&g.min_samples_split, rng),
                    min_samples_leaf: pick(&g.min_samples_leaf, rng),
                    bootstrap: pick(&g.bootstrap, rng),
                    seed: rng.random(),
                })
            }
            ClassifierKind::Lr => {
                let g = &self.lr;
                let (lo, hi) = (g.learning_rate_min.ln(), g.learning_rate_max.ln());
                let lr = if hi > lo {
                    rng.random_range(lo..hi).exp()
                } else {
                    g.learning_rate_min
                };
                Hyper::Lr(LrHyper {
                    learning_rate: lr,
                    l2: pick(&g.l2, rng),
                    max_epochs: g.max_epochs,
                    tolerance: g.tolerance,
                })
            }
        }
    }

    /// `budget` random grid points.
    pub fn sample_many<R: Rng>(&self, kind: ClassifierKind, budget: usize, rng: &mut R) -> Vec<Hyper> {
        (0..budget).map(|_| self.sample(kind, rng)).collect()
    }
}
