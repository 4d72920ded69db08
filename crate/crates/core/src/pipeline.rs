//! Windowing, feature assembly and the feature-table file format.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{self, BiomarkerParams, BiomarkerVector};
use crate::math;
use crate::signal::{CopdLabel, Recording};

/// Window length (s).
pub const WINDOW_S: f64 = 7200.0;
/// Hop between training windows of COPD recordings (s).
pub const AUGMENT_HOP_S: f64 = 3600.0;

pub const DEMOGRAPHIC_NAMES: [&str; 5] = ["gender", "age", "weight", "height", "smoking"];
pub const PSG_NAMES: [&str; 9] = ["AHI", "AI", "HI", "N1", "N2", "N3", "REM", "Arousal", "SE"];

/// Window layout: training tiles COPD recordings with a 1 h hop; evaluation
/// tiles every recording without overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tiling {
    Train,
    Eval,
}

impl FromStr for Tiling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Tiling::Train),
            "eval" => Ok(Tiling::Eval),
            _ => Err(Error::InvalidInput(format!(
                "unknown tiling `{s}` (expected train or eval)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<'a> {
    pub patient_id: &'a str,
    pub window_index: usize,
    pub start_s: f64,
    pub end_s: f64,
    pub samples: &'a [f64],
}

/// Full 2 h windows of a preprocessed recording. Trailing partial windows are
/// dropped.
pub fn make_windows(recording: &Recording, is_training: bool) -> Result<Vec<Window<'_>>> {
    let fs = recording.fs;
    let len = (WINDOW_S * fs).round() as usize;
    let n = recording.samples.len();
    if n < len {
        return Err(Error::RecordingTooShort {
            patient_id: recording.patient_id.clone(),
            samples: n,
            required: len,
        });
    }
    let hop_s = if is_training && recording.label.is_copd() {
        AUGMENT_HOP_S
    } else {
        WINDOW_S
    };
    let hop = (hop_s * fs).round() as usize;
    Ok((0..=(n - len) / hop)
        .map(|w| {
            let start = w * hop;
            Window {
                patient_id: &recording.patient_id,
                window_index: w,
                start_s: start as f64 / fs,
                end_s: (start + len) as f64 / fs,
                samples: &recording.samples[start..start + len],
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Demographics only.
    Model1,
    /// Oximetry biomarkers.
    Model2,
    /// Oximetry and demographics.
    Model3,
    /// Oximetry, demographics and PSG.
    Model4,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Model1,
        ModelKind::Model2,
        ModelKind::Model3,
        ModelKind::Model4,
    ];

    pub fn uses_oximetry(self) -> bool {
        self != ModelKind::Model1
    }

    pub fn uses_demographics(self) -> bool {
        self != ModelKind::Model2
    }

    pub fn uses_psg(self) -> bool {
        self == ModelKind::Model4
    }

    /// Number of columns before selection.
    pub fn n_features(self) -> usize {
        self.columns().len()
    }

    /// Default mRMR selection size (`None`: no selection).
    pub fn default_k(self) -> Option<usize> {
        match self {
            ModelKind::Model1 => None,
            ModelKind::Model2 => Some(38),
            ModelKind::Model3 | ModelKind::Model4 => Some(35),
        }
    }

    /// Ordered column names.
    pub fn columns(self) -> Vec<String> {
        let mut cols = Vec::new();
        if self.uses_oximetry() {
            let names = features::biomarker_names();
            cols.extend(names.iter().cloned());
            cols.extend(names.iter().map(|n| format!("{n}_overall")));
        }
        if self.uses_demographics() {
            cols.extend(DEMOGRAPHIC_NAMES.iter().map(|s| s.to_string()));
        }
        if self.uses_psg() {
            cols.extend(PSG_NAMES.iter().map(|s| s.to_string()));
        }
        cols
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            ModelKind::Model1 => 1,
            ModelKind::Model2 => 2,
            ModelKind::Model3 => 3,
            ModelKind::Model4 => 4,
        };
        write!(f, "model{n}")
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim_start_matches("model") {
            "1" => Ok(ModelKind::Model1),
            "2" => Ok(ModelKind::Model2),
            "3" => Ok(ModelKind::Model3),
            "4" => Ok(ModelKind::Model4),
            _ => Err(Error::InvalidInput(format!("unknown model kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub patient_id: String,
    pub window_index: usize,
    pub start_s: f64,
    pub label: CopdLabel,
    pub values: Vec<f64>,
}

impl FeatureRow {
    /// Whether the window belongs to the non-overlapping evaluation tiling.
    pub fn in_eval_tiling(&self) -> bool {
        self.start_s % WINDOW_S == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub kind: ModelKind,
    pub columns: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.values[j]).collect()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.rows.iter().map(|r| r.label.class()).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Restricts the matrix to the named columns, in the given order.
    pub fn select_columns(&self, names: &[String]) -> Result<FeatureMatrix> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.column_index(n)
                    .ok_or_else(|| Error::Table(format!("unknown feature column `{n}`")))
            })
            .collect::<Result<_>>()?;
        Ok(FeatureMatrix {
            kind: self.kind,
            columns: names.to_vec(),
            rows: self
                .rows
                .iter()
                .map(|r| FeatureRow {
                    values: idx.iter().map(|&j| r.values[j]).collect(),
                    ..r.clone()
                })
                .collect(),
        })
    }

    /// Keeps the rows for which `keep` holds.
    pub fn filter_rows(&self, mut keep: impl FnMut(&FeatureRow) -> bool) -> FeatureMatrix {
        FeatureMatrix {
            kind: self.kind,
            columns: self.columns.clone(),
            rows: self.rows.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }
}

/// One feature row: per-window oximetry values, the recording-level copy,
/// then demographics and PSG as the model requires.
pub fn featurize_window(
    window: &Window<'_>,
    overall: Option<&BiomarkerVector>,
    recording: &Recording,
    kind: ModelKind,
    params: &BiomarkerParams,
) -> Result<Vec<f64>> {
    let mut values = Vec::with_capacity(kind.n_features());
    if kind.uses_oximetry() {
        let overall =
            overall.ok_or_else(|| Error::InvalidInput(format!("{kind} needs the recording-level biomarkers")))?;
        values.extend(features::biomarkers(window.samples, recording.fs, params)?.values());
        values.extend(overall.values());
    }
    if kind.uses_demographics() {
        values.extend(recording.demographics.values());
    }
    if kind.uses_psg() {
        let psg = recording
            .psg
            .as_ref()
            .ok_or_else(|| Error::MissingPsg(kind.to_string(), recording.patient_id.clone()))?;
        values.extend(psg.values());
    }
    if let Some(j) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "patient {}: feature {} is not finite",
            recording.patient_id,
            kind.columns()[j]
        )));
    }
    Ok(values)
}

/// Feature rows of one preprocessed recording.
pub fn featurize_recording(
    recording: &Recording,
    kind: ModelKind,
    params: &BiomarkerParams,
    tiling: Tiling,
) -> Result<Vec<FeatureRow>> {
    let with_patient = |e: Error| match e {
        Error::RecordingTooShort { .. } | Error::MissingPsg(..) => e,
        other => Error::InvalidInput(format!("patient {}: {other}", recording.patient_id)),
    };
    let windows = make_windows(recording, tiling == Tiling::Train)?;
    let overall = if kind.uses_oximetry() {
        Some(features::biomarkers(&recording.samples, recording.fs, params).map_err(with_patient)?)
    } else {
        None
    };
    windows
        .iter()
        .map(|w| {
            Ok(FeatureRow {
                patient_id: recording.patient_id.clone(),
                window_index: w.window_index,
                start_s: w.start_s,
                label: recording.label,
                values: featurize_window(w, overall.as_ref(), recording, kind, params).map_err(with_patient)?,
            })
        })
        .collect()
}

/// Feature matrix of preprocessed recordings, in input order. Recordings are
/// featurized in parallel on the current rayon pool.
pub fn extract(
    recordings: &[Recording],
    kind: ModelKind,
    params: &BiomarkerParams,
    tiling: Tiling,
) -> Result<FeatureMatrix> {
    if recordings.is_empty() {
        return Err(Error::InvalidInput("no recordings to featurize".into()));
    }
    let per_patient: Vec<Vec<FeatureRow>> = recordings
        .par_iter()
        .map(|r| featurize_recording(r, kind, params, tiling))
        .collect::<Result<_>>()?;
    Ok(FeatureMatrix {
        kind,
        columns: kind.columns(),
        rows: per_patient.into_iter().flatten().collect(),
    })
}

/// Patient-level vote: COPD iff at least half of the windows say COPD.
pub fn majority_vote(predictions: &[u8]) -> Result<u8> {
    if predictions.is_empty() {
        return Err(Error::InvalidInput("majority vote over no windows".into()));
    }
    let copd = predictions.iter().filter(|&&p| p == 1).count();
    Ok(u8::from(2 * copd >= predictions.len()))
}

/// Writes the feature table (`patient_id,window_index,label,<features>`).
/// Values use the shortest representation that parses back to the same bits.
pub fn write_table(path: &Path, matrix: &FeatureMatrix) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let table_err = |e: csv::Error| Error::Table(format!("{}: {e}", path.display()));
    let mut header = vec!["patient_id".to_string(), "window_index".into(), "label".into()];
    header.extend(matrix.columns.iter().cloned());
    w.write_record(&header).map_err(table_err)?;
    for r in &matrix.rows {
        let mut rec = vec![
            r.patient_id.clone(),
            r.window_index.to_string(),
            r.label.class().to_string(),
        ];
        rec.extend(r.values.iter().map(|&v| math::fmt_f64(v)));
        w.write_record(&rec).map_err(table_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a feature table. `start_s` is not stored and is set to `NaN`; the
/// model kind is inferred from the column set.
pub fn read_table(path: &Path) -> Result<FeatureMatrix> {
    let table_err = |e: String| Error::Table(format!("{}: {e}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| table_err(e.to_string()))?;
    let header = rdr.headers().map_err(|e| table_err(e.to_string()))?.clone();
    if header.len() < 3 || &header[0] != "patient_id" || &header[1] != "window_index" || &header[2] != "label" {
        return Err(table_err("header must start with patient_id,window_index,label".into()));
    }
    let columns: Vec<String> = header.iter().skip(3).map(str::to_string).collect();
    let kind = ModelKind::ALL
        .into_iter()
        .find(|k| k.columns() == columns)
        .unwrap_or(ModelKind::Model2);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| table_err(e.to_string()))?;
        let line = i + 2;
        if rec.len() != header.len() {
            return Err(table_err(format!(
                "line {line}: expected {} fields, got {}",
                header.len(),
                rec.len()
            )));
        }
        let window_index = rec[1]
            .parse()
            .map_err(|_| table_err(format!("line {line}: bad window index `{}`", &rec[1])))?;
        let label = match &rec[2] {
            "0" => CopdLabel::non_copd(),
            "1" => CopdLabel::copd(None),
            other => return Err(table_err(format!("line {line}: bad label `{other}`"))),
        };
        let values = rec
            .iter()
            .skip(3)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| table_err(format!("line {line}: bad value `{v}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(FeatureRow {
            patient_id: rec[0].to_string(),
            window_index,
            start_s: f64::NAN,
            label,
            values,
        });
    }
    Ok(FeatureMatrix { kind, columns, rows })
}

/// Flattens a serializable value into sorted `key = value` lines.
pub fn key_value_lines<T: Serialize>(value: &T) -> Result<Vec<String>> {
    fn walk(prefix: &str, v: &toml::Value, out: &mut Vec<String>) {
        match v {
            toml::Value::Table(t) => {
                for (k, v) in t {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, v, out);
                }
            }
            other => out.push(format!("{prefix} = {other}")),
        }
    }
    let v = toml::Value::try_from(value).map_err(|e| Error::Config(e.to_string()))?;
    let mut out = Vec::new();
    walk("", &v, &mut out);
    Ok(out)
}

/// Sidecar metadata of a feature table.
pub fn write_sidecar(path: &Path, kind: ModelKind, tiling: Tiling, params: &BiomarkerParams) -> Result<()> {
    let mut text = format!(
        "model = {kind}\ntiling = {}\nwindow_s = {WINDOW_S}\naugment_hop_s = {AUGMENT_HOP_S}\nhard_level = median of scope\nzc_level = {}\n",
        match tiling {
            Tiling::Train => "train",
            Tiling::Eval => "eval",
        },
        match params.stats.zc_level {
            Some(l) => l.to_string(),
            None => "median of scope".into(),
        }
    );
    for line in key_value_lines(params)? {
        text.push_str(&line);
        text.push('\n');
    }
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
