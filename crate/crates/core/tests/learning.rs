mod common;

use common::*;
use oxiscreen::learn::forest::{DecisionTree, TreeParams};
use oxiscreen::learn::{
    auroc, Classifier, Confusion, Hyper, LogisticModel, LrHyper, MaxFeatures, RandomForest, RfHyper, Standardizer,
};
use oxiscreen::pipeline::{self, FeatureRow};
use oxiscreen::signal::preprocess;
use oxiscreen::synth::{cohort, CohortSpec};
use oxiscreen::{CopdLabel, CvParams, FeatureMatrix, ModelKind, StoredModel, Tiling};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn blob(rng: &mut ChaCha8Rng, cx: f64, cy: f64, n: usize) -> Vec<Vec<f64>> {
    let noise = gaussian(2 * n, rng);
    (0..n)
        .map(|i| vec![cx + 0.5 * noise[2 * i], cy + 0.5 * noise[2 * i + 1]])
        .collect()
}

fn xor_set(seed: u64, per_cluster: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut r = rng(seed);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (cx, cy, label) in [(-2.0, -2.0, 0), (2.0, 2.0, 0), (-2.0, 2.0, 1), (2.0, -2.0, 1)] {
        x.extend(blob(&mut r, cx, cy, per_cluster));
        y.extend(std::iter::repeat_n(label, per_cluster));
    }
    (x, y)
}

fn accuracy(pred: impl Fn(&[f64]) -> f64, x: &[Vec<f64>], y: &[u8]) -> f64 {
    let ok = x
        .iter()
        .zip(y)
        .filter(|(row, &l)| u8::from(pred(row) >= 0.5) == l)
        .count();
    ok as f64 / y.len() as f64
}

#[test]
fn forest_learns_xor_where_logistic_regression_cannot() {
    let (x, y) = xor_set(1, 100);
    let (xt, yt) = xor_set(2, 100);
    let rf = RandomForest::fit(&x, &y, &RfHyper::default()).unwrap();
    assert!(accuracy(|r| rf.predict_proba(r), &xt, &yt) >= 0.95);
    let lr = LogisticModel::fit(&x, &y, &LrHyper::default()).unwrap();
    assert!(accuracy(|r| lr.predict_proba(r), &xt, &yt) <= 0.6);
}

#[test]
fn logistic_regression_separates_blobs() {
    let mut r = rng(3);
    let mut x = blob(&mut r, -2.0, 0.0, 100);
    x.extend(blob(&mut r, 2.0, 0.0, 100));
    // Margin of 2 around the separating line x0 = 0.
    x.iter_mut().for_each(|p| p[0] = p[0].signum() * p[0].abs().max(1.0));
    let y: Vec<u8> = (0..200).map(|i| u8::from(i >= 100)).collect();
    let lr = LogisticModel::fit(
        &x,
        &y,
        &LrHyper {
            learning_rate: 0.5,
            l2: 0.0,
            ..LrHyper::default()
        },
    )
    .unwrap();
    assert_eq!(accuracy(|p| lr.predict_proba(p), &x, &y), 1.0);
}

#[test]
fn informative_feature_outranks_noise() {
    let mut r = rng(4);
    let n = 300;
    let y: Vec<u8> = (0..n).map(|i| u8::from(i % 2 == 0)).collect();
    let noise = gaussian(2 * n, &mut r);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|i| vec![noise[2 * i], f64::from(y[i]) * 1.5 + noise[2 * i + 1]])
        .collect();
    let rf = RandomForest::fit(
        &x,
        &y,
        &RfHyper {
            seed: 9,
            ..RfHyper::default()
        },
    )
    .unwrap();
    let imp = rf.feature_importance();
    assert!(imp[1] > imp[0], "{imp:?}");
    assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn degenerate_forest_is_a_plain_tree() {
    let (x, y) = xor_set(5, 30);
    let hyper = RfHyper {
        n_estimators: 1,
        max_features: MaxFeatures::All,
        max_depth: 6,
        bootstrap: false,
        ..RfHyper::default()
    };
    let rf = RandomForest::fit(&x, &y, &hyper).unwrap();
    let params = TreeParams {
        max_depth: 6,
        ..TreeParams::default()
    };
    let tree = DecisionTree::fit(&x, &y, &params, &mut rng(123));
    let (grid, _) = xor_set(6, 50);
    for row in &grid {
        assert_eq!(rf.predict_proba(row), tree.predict_proba(row));
    }
}

#[test]
fn forest_is_reproducible_per_seed() {
    let (x, y) = xor_set(7, 40);
    let (grid, _) = xor_set(8, 40);
    let h = RfHyper {
        n_estimators: 30,
        ..RfHyper::default()
    };
    let a = RandomForest::fit(&x, &y, &h).unwrap();
    let b = RandomForest::fit(&x, &y, &h).unwrap();
    assert_eq!(a, b);
    let c = RandomForest::fit(&x, &y, &RfHyper { seed: 1, ..h }).unwrap();
    assert!(grid.iter().any(|r| a.predict_proba(r) != c.predict_proba(r)));
}

#[test]
fn window_confusion_counts() {
    let c = Confusion {
        tp: 469,
        fp: 72,
        tn: 1046,
        fn_: 42,
    };
    assert_eq!(c.ppv(), 469.0 / 541.0);
    assert_eq!(c.se(), 469.0 / 511.0);
    assert!((c.ppv() - 0.8669).abs() < 1e-4);
    assert!((c.se() - 0.9178).abs() < 1e-4);
    assert_eq!(c.total(), 1629);
}

#[test]
fn metric_examples() {
    assert_eq!(auroc(&[1, 0, 1], &[0.9, 0.8, 0.3]).unwrap(), 0.5);
    assert!(auroc(&[1, 1], &[0.2, 0.3]).is_err());
    let y = [1, 1, 0, 0];
    let c = Confusion::from_predictions(&y, &[1, 1, 1, 1]).unwrap();
    assert_eq!(c.kappa(), 0.0);
    let c = Confusion::from_predictions(&y, &y).unwrap();
    assert_eq!((c.f1(), c.kappa()), (1.0, 1.0));
}

#[test]
fn standardizer_uses_training_statistics_only() {
    let mut r = rng(10);
    let train: Vec<Vec<f64>> = (0..50).map(|_| vec![r.random::<f64>()]).collect();
    let test: Vec<Vec<f64>> = (0..50).map(|_| vec![r.random::<f64>() + 1.0]).collect();
    let s = Standardizer::fit(&train);
    let z = s.transform(&test);
    let mean = z.iter().map(|v| v[0]).sum::<f64>() / 50.0;
    assert!(mean.abs() > 0.5);
}

fn toy_matrix(columns: &[&str]) -> FeatureMatrix {
    let mut r = rng(11);
    let rows = (0..40)
        .map(|i| {
            let copd = i % 2 == 0;
            FeatureRow {
                patient_id: format!("P{i}"),
                window_index: 0,
                start_s: 0.0,
                label: if copd {
                    CopdLabel::copd(None)
                } else {
                    CopdLabel::non_copd()
                },
                values: columns
                    .iter()
                    .map(|_| r.random::<f64>() + f64::from(u8::from(copd)))
                    .collect(),
            }
        })
        .collect();
    FeatureMatrix {
        kind: ModelKind::Model1,
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
    }
}

#[test]
fn stored_model_round_trips_and_rejects_other_columns() {
    let m = toy_matrix(&["a", "b", "c"]);
    let features = vec!["c".to_string(), "a".to_string()];
    let sel = m.select_columns(&features).unwrap();
    let x: Vec<Vec<f64>> = sel.rows.iter().map(|r| r.values.clone()).collect();
    let scaler = Standardizer::fit(&x);
    let hyper = Hyper::Rf(RfHyper {
        n_estimators: 10,
        ..RfHyper::default()
    });
    let clf = Classifier::fit(&scaler.transform(&x), &m.labels(), &hyper).unwrap();
    let model = StoredModel::new(ModelKind::Model1, hyper, m.columns.clone(), features, scaler, clf);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.save(&path).unwrap();
    let loaded = StoredModel::load(&path).unwrap();
    assert_eq!(loaded, model);
    assert_eq!(loaded.predict(&m).unwrap(), model.predict(&m).unwrap());

    assert!(loaded.predict(&toy_matrix(&["a", "b", "d"])).is_err());
    assert!(loaded.predict(&toy_matrix(&["b", "a", "c"])).is_err());
    assert!(loaded.predict(&toy_matrix(&["a", "b"])).is_err());

    let bumped = std::fs::read_to_string(&path)
        .unwrap()
        .replace("\"version\":1", "\"version\":99");
    assert!(StoredModel::from_json(&bumped).is_err());
}

#[test]
fn nested_cv_keeps_patients_and_augmentation_apart() {
    let spec: CohortSpec = "healthy:0.5,osa_mild:0.2,copd_like:0.3".parse().unwrap();
    let recs: Vec<_> = cohort(&spec, 40, 17)
        .unwrap()
        .into_iter()
        .map(|p| preprocess(&p.recording).unwrap())
        .collect();
    let matrix = pipeline::extract(&recs, ModelKind::Model1, &Default::default(), Tiling::Train).unwrap();
    assert!(matrix.rows.iter().any(|r| !r.in_eval_tiling()));
    let params = CvParams {
        budget: 3,
        seed: 5,
        ..CvParams::default()
    };
    let grid = Default::default();
    let report = oxiscreen::learn::nested_cv(&matrix, oxiscreen::ClassifierKind::Lr, &grid, &params).unwrap();
    assert_eq!(report.folds.len(), 5);
    for f in &report.folds {
        f.audit.verify().unwrap();
        assert!(f.audit.augmented_train_rows > 0);
        assert_eq!(f.audit.inner.len(), 5);
        for (tr, va) in &f.audit.inner {
            assert!(tr.is_disjoint(va));
            assert!(tr.union(va).count() == f.audit.train_patients.len());
        }
        let c = f.patient_metrics.confusion;
        assert_eq!(c.total() as usize, f.audit.test_patients.len());
        assert!(f.patients.iter().all(|p| f.audit.test_patients.contains(&p.patient_id)));
    }
    let again = oxiscreen::learn::nested_cv(&matrix, oxiscreen::ClassifierKind::Lr, &grid, &params).unwrap();
    assert_eq!(format!("{:?}", report.summary), format!("{:?}", again.summary));
}
