use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use oxiscreen::config::RunConfig;
use oxiscreen::learn::forest::ranked_importance;
use oxiscreen::learn::{nested_cv, Classifier, CvReport};
use oxiscreen::math::fmt_f64;
use oxiscreen::pipeline::{self, FeatureMatrix, Tiling};
use oxiscreen::select;
use oxiscreen::signal::{self, Recording};
use oxiscreen::synth::{self, CohortSpec};

use crate::output::{ensure_dir, Table};

fn load_preprocessed(manifest: &Path) -> Result<Vec<Recording>> {
    let recordings = signal::load_manifest(manifest)?;
    if recordings.is_empty() {
        bail!("manifest {} lists no recordings", manifest.display());
    }
    recordings
        .iter()
        .map(|r| signal::preprocess(r).with_context(|| format!("preprocessing patient {}", r.patient_id)))
        .collect()
}

pub fn synth(cfg: &RunConfig, out: &Path) -> Result<()> {
    let spec: CohortSpec = cfg.synth.cohort.parse()?;
    ensure_dir(out)?;
    let patients = synth::cohort(&spec, cfg.synth.n, cfg.seed)?;
    synth::write_cohort(out, &patients)?;
    cfg.echo(out)?;
    println!("wrote {} patients to {}", patients.len(), out.display());
    Ok(())
}

pub fn extract(cfg: &RunConfig, manifest: &Path, out: &Path) -> Result<()> {
    let recordings = load_preprocessed(manifest)?;
    let matrix = pipeline::extract(&recordings, cfg.model, &cfg.biomarkers, cfg.tiling)?;
    ensure_dir(out)?;
    pipeline::write_table(&out.join("features.csv"), &matrix)?;
    pipeline::write_sidecar(&out.join("features.meta"), cfg.model, cfg.tiling, &cfg.biomarkers)?;
    cfg.echo(out)?;
    println!(
        "{}: {} windows x {} features",
        cfg.model,
        matrix.rows.len(),
        matrix.columns.len()
    );
    Ok(())
}

fn read_features(path: &Path) -> Result<FeatureMatrix> {
    let m = pipeline::read_table(path)?;
    if m.rows.is_empty() {
        bail!("feature table {} has no rows", path.display());
    }
    Ok(m)
}

fn distinct_patients(m: &FeatureMatrix) -> usize {
    let mut ids: Vec<&str> = m.rows.iter().map(|r| r.patient_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.len()
}

pub fn screen(cfg: &RunConfig, features: &Path, out: &Path) -> Result<()> {
    let matrix = read_features(features)?;
    let rows = select::screen(&matrix)?;
    ensure_dir(out)?;
    let mut t = Table::new(&["feature", "p_value", "rank"]);
    let mut d = Table::new(&["feature", "median_non_copd", "iqr_non_copd", "median_copd", "iqr_copd"]);
    for r in &rows {
        t.row([r.feature.clone(), fmt_f64(r.p_value), r.rank.to_string()]);
        d.row([
            r.feature.clone(),
            fmt_f64(r.median_non_copd),
            fmt_f64(r.iqr_non_copd),
            fmt_f64(r.median_copd),
            fmt_f64(r.iqr_copd),
        ]);
    }
    t.write(&out.join("screening.csv"))?;
    d.write(&out.join("screening_groups.csv"))?;
    let labels = matrix.labels();
    let meta = format!(
        "unit_of_analysis = window\nn_windows = {}\nn_patients = {}\nn_windows_copd = {}\nn_windows_non_copd = {}\ntest = two-sided rank-sum, normal approximation with tie and continuity correction\n",
        matrix.rows.len(),
        distinct_patients(&matrix),
        labels.iter().filter(|&&l| l == 1).count(),
        labels.iter().filter(|&&l| l == 0).count(),
    );
    fs::write(out.join("screening.meta"), meta)?;
    cfg.echo(out)?;
    let significant = rows.iter().filter(|r| r.p_value < 0.05).count();
    println!("{significant} of {} features with p < 0.05", rows.len());
    Ok(())
}

pub fn select(cfg: &RunConfig, features: &Path, out: &Path) -> Result<()> {
    let matrix = read_features(features)?;
    let k = cfg.cv.k.unwrap_or(matrix.columns.len()).min(matrix.columns.len());
    let result = select::mrmr_select(&matrix, k, cfg.cv.bins)?;
    ensure_dir(out)?;
    selection_table(&result).write(&out.join("selection.csv"))?;
    cfg.echo(out)?;
    println!("selected {} of {} features", result.names.len(), matrix.columns.len());
    Ok(())
}

fn selection_table(result: &select::MrmrResult) -> Table {
    let mut t = Table::new(&["step", "feature", "phi", "relevance"]);
    for (i, name) in result.names.iter().enumerate() {
        t.row([
            (i + 1).to_string(),
            name.clone(),
            fmt_f64(result.phi[i]),
            fmt_f64(result.relevance[i]),
        ]);
    }
    t
}

pub fn train_eval(cfg: &RunConfig, manifest: &Path, out: &Path) -> Result<()> {
    let recordings = load_preprocessed(manifest)?;
    let matrix = pipeline::extract(&recordings, cfg.model, &cfg.biomarkers, Tiling::Train)?;
    let report = nested_cv(&matrix, cfg.classifier, &cfg.grid, &cfg.cv)?;
    ensure_dir(out)?;
    write_report(cfg, &report, out)?;
    cfg.echo(out)?;
    if let Some(a) = report.summary_value("patient_auroc") {
        println!(
            "{} {}: patient AUROC median {:.4} (IQR {:.4})",
            cfg.model, cfg.classifier, a.median, a.iqr
        );
    }
    Ok(())
}

fn write_report(cfg: &RunConfig, report: &CvReport, out: &Path) -> Result<()> {
    let (model, clf) = (cfg.model.to_string(), cfg.classifier.to_string());
    let mut summary = Table::new(&["model", "classifier", "metric", "median", "sd"]);
    let mut full = Table::new(&[
        "model",
        "classifier",
        "metric",
        "median",
        "iqr",
        "mean",
        "sd",
        "n_folds",
    ]);
    for r in &report.summary {
        summary.row([
            model.clone(),
            clf.clone(),
            r.metric.clone(),
            fmt_f64(r.median),
            fmt_f64(r.sd),
        ]);
        full.row([
            model.clone(),
            clf.clone(),
            r.metric.clone(),
            fmt_f64(r.median),
            fmt_f64(r.iqr),
            fmt_f64(r.mean),
            fmt_f64(r.sd),
            r.n_folds.to_string(),
        ]);
    }
    summary.write(&out.join("summary.csv"))?;
    full.write(&out.join("summary_full.csv"))?;

    let mut folds = Table::new(&["fold", "scope", "metric", "value"]);
    let mut confusion = Table::new(&["fold", "scope", "tp", "fp", "tn", "fn"]);
    let mut splits = Table::new(&["fold", "inner_fold", "patient_id", "role"]);
    let mut audit = Table::new(&[
        "fold",
        "augmented_train_rows",
        "augmented_validation_rows",
        "augmented_test_rows",
    ]);
    for f in &report.folds {
        let i = f.index;
        let a = &f.audit;
        audit.row([
            i.to_string(),
            a.augmented_train_rows.to_string(),
            a.augmented_validation_rows.to_string(),
            a.augmented_test_rows.to_string(),
        ]);
        for (scope, m) in [("window", &f.window_metrics), ("patient", &f.patient_metrics)] {
            for (name, v) in m.named() {
                folds.row([i.to_string(), scope.to_string(), name, fmt_f64(v)]);
            }
            let c = m.confusion;
            confusion.row([
                i.to_string(),
                scope.to_string(),
                c.tp.to_string(),
                c.fp.to_string(),
                c.tn.to_string(),
                c.fn_.to_string(),
            ]);
        }
        for p in &f.audit.train_patients {
            splits.row([i.to_string(), String::new(), p.clone(), "train".into()]);
        }
        for p in &f.audit.test_patients {
            splits.row([i.to_string(), String::new(), p.clone(), "test".into()]);
        }
        for (j, (_, val)) in f.audit.inner.iter().enumerate() {
            for p in val {
                splits.row([i.to_string(), j.to_string(), p.clone(), "validation".into()]);
            }
        }

        let roc = |points: &[oxiscreen::learn::RocPoint]| {
            let mut t = Table::new(&["fpr", "tpr", "threshold"]);
            for p in points {
                t.row([fmt_f64(p.fpr), fmt_f64(p.tpr), fmt_f64(p.threshold)]);
            }
            t
        };
        roc(&f.patient_roc).write(&out.join(format!("roc_fold{i}.csv")))?;
        roc(&f.window_roc).write(&out.join(format!("roc_window_fold{i}.csv")))?;

        if let Some(sel) = &f.selection {
            selection_table(sel).write(&out.join(format!("selection_fold{i}.csv")))?;
        }

        let mut preds = Table::new(&["patient_id", "label", "gold", "score", "prediction", "n_windows"]);
        for p in &f.patients {
            preds.row([
                p.patient_id.clone(),
                p.label.class().to_string(),
                p.label.gold().map(|g| g.number().to_string()).unwrap_or_default(),
                fmt_f64(p.score),
                p.prediction.to_string(),
                p.n_windows.to_string(),
            ]);
        }
        preds.write(&out.join(format!("predictions_fold{i}.csv")))?;

        let mut search = Table::new(&["candidate", "mean_validation_auroc"]);
        for (j, s) in f.search_scores.iter().enumerate() {
            search.row([j.to_string(), fmt_f64(*s)]);
        }
        search.write(&out.join(format!("search_fold{i}.csv")))?;

        if let Classifier::Rf(rf) = &f.model.classifier {
            let mut t = Table::new(&["feature", "importance"]);
            for (name, v) in ranked_importance(&f.model.features, &rf.feature_importance()) {
                t.row([name, fmt_f64(v)]);
            }
            t.write(&out.join(format!("importance_fold{i}.csv")))?;
        }
        f.model.save(&out.join(format!("model_fold{i}.json")))?;
    }
    folds.write(&out.join("folds.csv"))?;
    confusion.write(&out.join("confusion.csv"))?;
    splits.write(&out.join("splits.csv"))?;
    audit.write(&out.join("audit.csv"))?;
    Ok(())
}

pub fn report(runs: &[PathBuf], out: &Path) -> Result<()> {
    let mut merged: Option<Table> = None;
    for run in runs {
        let path = run.join("summary_full.csv");
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
        let table = merged.get_or_insert_with(|| Table::new(&header));
        for line in lines.filter(|l| !l.is_empty()) {
            table.row(line.split(','));
        }
    }
    let table = merged.expect("at least one run");
    ensure_dir(out)?;
    table.write(&out.join("report.csv"))?;
    print!("{}", table.as_str());
    Ok(())
}
