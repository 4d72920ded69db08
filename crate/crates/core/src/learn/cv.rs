//! Nested cross-validation with patient-level splits.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{self, Metrics, RocPoint};
use super::model_io::StoredModel;
use super::scale::Standardizer;
use super::search::Grid;
use super::{Classifier, ClassifierKind, Hyper};
use crate::error::{Error, Result};
use crate::math;
use crate::pipeline::{majority_vote, FeatureMatrix, FeatureRow};
use crate::select::{self, MrmrResult};
use crate::signal::CopdLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CvParams {
    pub n_outer: usize,
    pub n_inner: usize,
    pub test_fraction: f64,
    /// Random-search grid points per outer fold.
    pub budget: usize,
    /// mRMR selection size; `None` keeps every column.
    pub k: Option<usize>,
    pub bins: usize,
    /// Window probability at or above which a window is called COPD.
    pub threshold: f64,
    /// Taken from the run seed, not from configuration.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for CvParams {
    fn default() -> Self {
        CvParams {
            n_outer: 5,
            n_inner: 5,
            test_fraction: 0.2,
            budget: 60,
            k: None,
            bins: 10,
            threshold: 0.5,
            seed: 0,
        }
    }
}

/// Which patients (and which windows) sat on each side of every boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAudit {
    pub train_patients: BTreeSet<String>,
    pub test_patients: BTreeSet<String>,
    pub inner: Vec<(BTreeSet<String>, BTreeSet<String>)>,
    /// Overlapping (augmentation-only) windows used per role.
    pub augmented_train_rows: usize,
    pub augmented_validation_rows: usize,
    pub augmented_test_rows: usize,
}

impl FoldAudit {
    pub fn verify(&self) -> Result<()> {
        let leak = |a: &BTreeSet<String>, b: &BTreeSet<String>, what: &str| -> Result<()> {
            match a.intersection(b).next() {
                Some(p) => Err(Error::Stratification(format!(
                    "patient {p} is on both sides of the {what} split"
                ))),
                None => Ok(()),
            }
        };
        leak(&self.train_patients, &self.test_patients, "train/test")?;
        for (tr, va) in &self.inner {
            leak(tr, va, "train/validation")?;
            if !tr.is_subset(&self.train_patients) || !va.is_subset(&self.train_patients) {
                return Err(Error::Stratification(
                    "inner split uses patients outside the training split".into(),
                ));
            }
        }
        if self.augmented_validation_rows > 0 || self.augmented_test_rows > 0 {
            return Err(Error::Stratification(
                "augmented windows reached an evaluation set".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientPrediction {
    pub patient_id: String,
    pub label: CopdLabel,
    /// Mean window probability.
    pub score: f64,
    pub prediction: u8,
    pub n_windows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldReport {
    pub index: usize,
    pub selection: Option<MrmrResult>,
    pub hyper: Hyper,
    /// Mean inner-validation AUROC of each searched grid point.
    pub search_scores: Vec<f64>,
    pub window_metrics: Metrics,
    pub patient_metrics: Metrics,
    pub window_roc: Vec<RocPoint>,
    pub patient_roc: Vec<RocPoint>,
    pub patients: Vec<PatientPrediction>,
    pub model: StoredModel,
    pub audit: FoldAudit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub metric: String,
    pub median: f64,
    pub iqr: f64,
    pub mean: f64,
    pub sd: f64,
    /// Folds in which the metric was defined.
    pub n_folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub folds: Vec<FoldReport>,
    pub summary: Vec<SummaryRow>,
}

impl CvReport {
    pub fn summary_value(&self, metric: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.metric == metric)
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Patients per class, sorted by id.
fn patients_by_class(matrix: &FeatureMatrix) -> [Vec<String>; 2] {
    let mut classes: [BTreeSet<String>; 2] = Default::default();
    for r in &matrix.rows {
        classes[usize::from(r.label.class())].insert(r.patient_id.clone());
    }
    classes.map(|s| s.into_iter().collect())
}

/// Stratified patient-level hold-out: `(train, test)`.
pub fn stratified_holdout(
    classes: &[Vec<String>; 2],
    test_fraction: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(BTreeSet<String>, BTreeSet<String>)> {
    let mut train = BTreeSet::new();
    let mut test = BTreeSet::new();
    for (c, ids) in classes.iter().enumerate() {
        if ids.len() < 2 {
            return Err(Error::Stratification(format!(
                "class {c} has {} patient(s); a train/test split needs at least 2",
                ids.len()
            )));
        }
        let mut ids = ids.clone();
        ids.shuffle(rng);
        let n_test = ((ids.len() as f64 * test_fraction).round() as usize).clamp(1, ids.len() - 1);
        test.extend(ids[..n_test].iter().cloned());
        train.extend(ids[n_test..].iter().cloned());
    }
    Ok((train, test))
}

/// Stratified patient-level k-fold assignment: the validation set of each fold.
pub fn stratified_kfold(classes: &[Vec<String>; 2], k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<BTreeSet<String>>> {
    let mut folds = vec![BTreeSet::new(); k];
    for (c, ids) in classes.iter().enumerate() {
        if ids.len() < k {
            return Err(Error::Stratification(format!(
                "class {c} has {} training patient(s), fewer than the {k} inner folds",
                ids.len()
            )));
        }
        let mut ids = ids.clone();
        ids.shuffle(rng);
        for (i, id) in ids.into_iter().enumerate() {
            folds[i % k].insert(id);
        }
    }
    Ok(folds)
}

fn rows_of<'a>(matrix: &'a FeatureMatrix, patients: &BTreeSet<String>, eval_only: bool) -> Vec<&'a FeatureRow> {
    matrix
        .rows
        .iter()
        .filter(|r| patients.contains(&r.patient_id) && (!eval_only || r.in_eval_tiling()))
        .collect()
}

fn xy(rows: &[&FeatureRow]) -> (Vec<Vec<f64>>, Vec<u8>) {
    (
        rows.iter().map(|r| r.values.clone()).collect(),
        rows.iter().map(|r| r.label.class()).collect(),
    )
}

fn fit_scaled(rows: &[&FeatureRow], hyper: &Hyper) -> Result<(Standardizer, Classifier)> {
    let (x, y) = xy(rows);
    let scaler = Standardizer::fit(&x);
    let model = Classifier::fit(&scaler.transform(&x), &y, hyper)?;
    Ok((scaler, model))
}

fn predict(scaler: &Standardizer, model: &Classifier, rows: &[&FeatureRow]) -> Vec<f64> {
    rows.iter()
        .map(|r| model.predict_proba(&scaler.transform_row(&r.values)))
        .collect()
}

/// Per-patient score (mean probability) and majority-vote prediction, in
/// order of first appearance.
pub fn aggregate_patients(rows: &[&FeatureRow], scores: &[f64], threshold: f64) -> Result<Vec<PatientPrediction>> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, (CopdLabel, Vec<f64>)> = BTreeMap::new();
    for (r, &s) in rows.iter().zip(scores) {
        groups
            .entry(&r.patient_id)
            .or_insert_with(|| {
                order.push(&r.patient_id);
                (r.label, Vec::new())
            })
            .1
            .push(s);
    }
    order
        .into_iter()
        .map(|id| {
            let (label, s) = &groups[id];
            let votes: Vec<u8> = s.iter().map(|&p| u8::from(p >= threshold)).collect();
            Ok(PatientPrediction {
                patient_id: id.to_string(),
                label: *label,
                score: math::mean(s),
                prediction: majority_vote(&votes)?,
                n_windows: s.len(),
            })
        })
        .collect()
}

/// Mean per-window validation AUROC of `hyper` over the inner folds.
fn inner_score(
    matrix: &FeatureMatrix,
    train_patients: &BTreeSet<String>,
    inner: &[BTreeSet<String>],
    hyper: &Hyper,
) -> Result<f64> {
    let mut scores = Vec::with_capacity(inner.len());
    for val in inner {
        let tr: BTreeSet<String> = train_patients.difference(val).cloned().collect();
        let train_rows = rows_of(matrix, &tr, false);
        let val_rows = rows_of(matrix, val, true);
        let (scaler, model) = match fit_scaled(&train_rows, hyper) {
            Ok(m) => m,
            // A diverging grid point scores worst rather than aborting the search.
            Err(Error::Training(_)) => return Ok(f64::NEG_INFINITY),
            Err(e) => return Err(e),
        };
        let y: Vec<u8> = val_rows.iter().map(|r| r.label.class()).collect();
        scores.push(metrics::auroc(&y, &predict(&scaler, &model, &val_rows))?);
    }
    Ok(math::mean(&scores))
}

fn run_fold(
    matrix: &FeatureMatrix,
    classifier: ClassifierKind,
    grid: &Grid,
    params: &CvParams,
    classes: &[Vec<String>; 2],
    index: usize,
) -> Result<FoldReport> {
    let stream = index as u64 * 8;
    let (train_p, test_p) = stratified_holdout(classes, params.test_fraction, &mut rng_for(params.seed, stream))?;

    // Feature selection on the training windows only.
    let train_all = matrix.filter_rows(|r| train_p.contains(&r.patient_id));
    let selection = match params.k {
        Some(k) if k < matrix.columns.len() => Some(select::mrmr_select(&train_all, k, params.bins)?),
        _ => None,
    };
    let features = match &selection {
        Some(s) => s.names.clone(),
        None => matrix.columns.clone(),
    };
    let reduced = matrix.select_columns(&features)?;

    let train_classes: [Vec<String>; 2] = classes
        .clone()
        .map(|ids| ids.into_iter().filter(|p| train_p.contains(p)).collect());
    let inner = stratified_kfold(&train_classes, params.n_inner, &mut rng_for(params.seed, stream + 1))?;
    let candidates = grid.sample_many(classifier, params.budget.max(1), &mut rng_for(params.seed, stream + 2));
    let search_scores: Vec<f64> = candidates
        .par_iter()
        .map(|h| inner_score(&reduced, &train_p, &inner, h))
        .collect::<Result<_>>()?;
    let best = search_scores
        .iter()
        .enumerate()
        .fold(0, |b, (i, s)| if *s > search_scores[b] { i } else { b });
    let hyper = candidates[best];

    let train_rows = rows_of(&reduced, &train_p, false);
    let test_rows = rows_of(&reduced, &test_p, true);
    let (scaler, model) = fit_scaled(&train_rows, &hyper)?;
    let scores = predict(&scaler, &model, &test_rows);
    let preds: Vec<u8> = scores.iter().map(|&s| u8::from(s >= params.threshold)).collect();
    let labels: Vec<CopdLabel> = test_rows.iter().map(|r| r.label).collect();
    let y: Vec<u8> = labels.iter().map(CopdLabel::class).collect();
    let window_metrics = Metrics::compute(&labels, &scores, &preds)?;
    let window_roc = metrics::roc_curve(&y, &scores)?;

    let patients = aggregate_patients(&test_rows, &scores, params.threshold)?;
    let p_labels: Vec<CopdLabel> = patients.iter().map(|p| p.label).collect();
    let p_scores: Vec<f64> = patients.iter().map(|p| p.score).collect();
    let p_preds: Vec<u8> = patients.iter().map(|p| p.prediction).collect();
    let p_y: Vec<u8> = p_labels.iter().map(CopdLabel::class).collect();
    let patient_metrics = Metrics::compute(&p_labels, &p_scores, &p_preds)?;
    let patient_roc = metrics::roc_curve(&p_y, &p_scores)?;

    let augmented = |rows: &[&FeatureRow]| rows.iter().filter(|r| !r.in_eval_tiling()).count();
    let audit = FoldAudit {
        train_patients: train_p.clone(),
        test_patients: test_p,
        inner: inner
            .iter()
            .map(|val| (train_p.difference(val).cloned().collect(), val.clone()))
            .collect(),
        augmented_train_rows: augmented(&train_rows),
        augmented_validation_rows: inner.iter().map(|v| augmented(&rows_of(&reduced, v, true))).sum(),
        augmented_test_rows: augmented(&test_rows),
    };
    audit.verify()?;

    Ok(FoldReport {
        index,
        selection,
        hyper,
        search_scores,
        window_metrics,
        patient_metrics,
        window_roc,
        patient_roc,
        patients,
        model: StoredModel::new(matrix.kind, hyper, matrix.columns.clone(), features, scaler, model),
        audit,
    })
}

/// Nested cross-validation over a feature matrix built with the training
/// tiling (evaluation windows are the non-overlapping subset).
pub fn nested_cv(
    matrix: &FeatureMatrix,
    classifier: ClassifierKind,
    grid: &Grid,
    params: &CvParams,
) -> Result<CvReport> {
    if params.n_outer == 0 || params.n_inner < 2 {
        return Err(Error::InvalidInput("need at least 1 outer and 2 inner folds".into()));
    }
    if matrix.rows.iter().any(|r| r.start_s.is_nan()) {
        return Err(Error::InvalidInput(
            "nested CV needs window start times to tell augmented windows apart".into(),
        ));
    }
    let classes = patients_by_class(matrix);
    for (c, ids) in classes.iter().enumerate() {
        if ids.len() < params.n_outer {
            return Err(Error::Stratification(format!(
                "class {c} has {} patient(s), fewer than the {} outer folds",
                ids.len(),
                params.n_outer
            )));
        }
    }
    let folds: Vec<FoldReport> = (0..params.n_outer)
        .into_par_iter()
        .map(|i| run_fold(matrix, classifier, grid, params, &classes, i))
        .collect::<Result<_>>()?;
    let summary = summarize(&folds);
    Ok(CvReport { folds, summary })
}

fn summarize(folds: &[FoldReport]) -> Vec<SummaryRow> {
    let mut names: Vec<String> = Vec::new();
    let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for f in folds {
        for (scope, m) in [("window", &f.window_metrics), ("patient", &f.patient_metrics)] {
            for (name, v) in m.named() {
                let key = format!("{scope}_{name}");
                if !values.contains_key(&key) {
                    names.push(key.clone());
                }
                values.entry(key).or_default().push(v);
            }
        }
    }
    names.sort_by_key(|n| (!n.starts_with("patient"), n.contains("gold"), n.clone()));
    names
        .into_iter()
        .map(|metric| {
            let v = &values[&metric];
            SummaryRow {
                median: math::median(v),
                iqr: math::iqr(v),
                mean: math::mean(v),
                sd: math::pop_sd(v),
                n_folds: v.len(),
                metric,
            }
        })
        .collect()
}
