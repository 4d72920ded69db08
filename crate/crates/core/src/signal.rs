//! Recording data model, manifest ingestion and the two-stage SpO2 cleanup
//! (physiological range filter followed by a centred median filter).

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowest SpO2 value kept by the range filter (%).
pub const SPO2_MIN: f64 = 50.0;
/// Highest SpO2 value kept by the range filter (%).
pub const SPO2_MAX: f64 = 100.0;
/// Median filter length used by [`preprocess`].
pub const MEDIAN_WINDOW: usize = 9;

/// Stage tolerance for N1+N2+N3+REM, absorbing scorer rounding.
const STAGE_SUM_TOLERANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gold {
    G1 = 1,
    G2 = 2,
    G3 = 3,
    G4 = 4,
}

impl Gold {
    pub fn from_number(n: u8) -> Option<Gold> {
        match n {
            1 => Some(Gold::G1),
            2 => Some(Gold::G2),
            3 => Some(Gold::G3),
            4 => Some(Gold::G4),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        self as u8
    }

    /// Grade from post-bronchodilator FEV1 in % of predicted.
    pub fn from_fev1_percent(fev1: f64) -> Gold {
        if fev1 >= 80.0 {
            Gold::G1
        } else if fev1 >= 50.0 {
            Gold::G2
        } else if fev1 >= 30.0 {
            Gold::G3
        } else {
            Gold::G4
        }
    }

    pub const ALL: [Gold; 4] = [Gold::G1, Gold::G2, Gold::G3, Gold::G4];
}

impl fmt::Display for Gold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GOLD{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopdLabel {
    is_copd: bool,
    gold: Option<Gold>,
}

impl CopdLabel {
    pub fn new(is_copd: bool, gold: Option<Gold>) -> Result<Self> {
        if gold.is_some() && !is_copd {
            return Err(Error::InvalidInput(
                "a GOLD grade is only allowed on COPD patients".into(),
            ));
        }
        Ok(CopdLabel { is_copd, gold })
    }

    pub fn non_copd() -> Self {
        CopdLabel {
            is_copd: false,
            gold: None,
        }
    }

    pub fn copd(gold: Option<Gold>) -> Self {
        CopdLabel { is_copd: true, gold }
    }

    pub fn is_copd(&self) -> bool {
        self.is_copd
    }

    pub fn gold(&self) -> Option<Gold> {
        self.gold
    }

    /// Binary class used by the classifiers (1 = COPD).
    pub fn class(&self) -> u8 {
        u8::from(self.is_copd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gender {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoking {
    NonSmoker = 0,
    Smoker = 1,
    ExSmoker = 2,
}

impl Smoking {
    pub fn from_code(code: u8) -> Option<Smoking> {
        match code {
            0 => Some(Smoking::NonSmoker),
            1 => Some(Smoking::Smoker),
            2 => Some(Smoking::ExSmoker),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Demographics {
    pub gender: Gender,
    /// years
    pub age: f64,
    /// kg
    pub weight: f64,
    /// cm
    pub height: f64,
    pub smoking: Smoking,
}

impl Demographics {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("age", self.age), ("weight", self.weight), ("height", self.height)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Feature encoding: gender (male = 1), age, weight, height, smoking code.
    pub fn values(&self) -> [f64; 5] {
        [
            match self.gender {
                Gender::Male => 1.0,
                Gender::Female => 0.0,
            },
            self.age,
            self.weight,
            self.height,
            f64::from(self.smoking.code()),
        ]
    }
}

/// PSG-scored features, ingested as given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsgFeatures {
    pub ahi: f64,
    pub ai: f64,
    pub hi: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub rem: f64,
    pub arousal: f64,
    pub se: f64,
}

impl PsgFeatures {
    pub fn values(&self) -> [f64; 9] {
        [
            self.ahi,
            self.ai,
            self.hi,
            self.n1,
            self.n2,
            self.n3,
            self.rem,
            self.arousal,
            self.se,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.values().iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(
                "PSG features must be finite and non-negative".into(),
            ));
        }
        let stages = self.n1 + self.n2 + self.n3 + self.rem;
        if stages > 100.0 + STAGE_SUM_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "sleep stage percentages sum to {stages} (> 100)"
            )));
        }
        Ok(())
    }
}

/// One patient's overnight SpO2 series with its label and covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub patient_id: String,
    /// SpO2 samples in %.
    pub samples: Vec<f64>,
    /// Sampling rate in Hz.
    pub fs: f64,
    pub label: CopdLabel,
    pub demographics: Demographics,
    pub psg: Option<PsgFeatures>,
}

impl Recording {
    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::InvalidInput(format!(
                "recording {} has no samples",
                self.patient_id
            )));
        }
        if !(self.fs.is_finite() && self.fs > 0.0) {
            return Err(Error::InvalidInput(format!(
                "recording {} has invalid sampling rate {}",
                self.patient_id, self.fs
            )));
        }
        self.demographics.validate()?;
        if let Some(psg) = &self.psg {
            psg.validate()?;
        }
        Ok(())
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }
}

/// Drops every sample outside [50, 100] % (and any non-finite value), closing
/// up the series.
pub fn range_filter(samples: &[f64]) -> Result<Vec<f64>> {
    let kept: Vec<f64> = samples
        .iter()
        .copied()
        .filter(|s| (SPO2_MIN..=SPO2_MAX).contains(s))
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyAfterPreprocessing);
    }
    Ok(kept)
}

/// Centred running median of odd length `k`. Near the edges the window shrinks
/// symmetrically so the output has the input's length.
pub fn median_smooth(samples: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "median window must be odd and >= 1, got {k}"
        )));
    }
    let n = samples.len();
    let half = k / 2;
    let mut buf = Vec::with_capacity(k);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let h = half.min(i).min(n - 1 - i);
        buf.clear();
        buf.extend_from_slice(&samples[i - h..=i + h]);
        let mid = buf.len() / 2;
        let (_, m, _) = buf.select_nth_unstable_by(mid, f64::total_cmp);
        out.push(*m);
    }
    Ok(out)
}

/// Range filter followed by the length-9 median filter.
pub fn preprocess_samples(samples: &[f64]) -> Result<Vec<f64>> {
    median_smooth(&range_filter(samples)?, MEDIAN_WINDOW)
}

pub fn preprocess(recording: &Recording) -> Result<Recording> {
    let samples = preprocess_samples(&recording.samples)?;
    Ok(Recording {
        samples,
        ..recording.clone()
    })
}

/// Column layout of the recording manifest.
pub const MANIFEST_HEADER: [&str; 19] = [
    "patient_id",
    "signal_path",
    "fs",
    "is_copd",
    "gold",
    "gender",
    "age",
    "weight",
    "height",
    "smoking",
    "ahi",
    "ai",
    "hi",
    "n1",
    "n2",
    "n3",
    "rem",
    "arousal",
    "se",
];

/// Reads a signal file: one decimal sample per line, no header.
pub fn read_signal(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| {
            Error::InvalidInput(format!(
                "{}: line {}: non-numeric sample {t:?}",
                path.display(),
                lineno + 1
            ))
        })?;
        out.push(v);
    }
    Ok(out)
}

pub fn write_signal(path: &Path, samples: &[f64]) -> Result<()> {
    let mut text = String::with_capacity(samples.len() * 6);
    for s in samples {
        text.push_str(&format!("{s}\n"));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Loads every manifest row, reading and validating the referenced signals.
/// Rows are numbered from 1 (the header is not counted).
pub fn load_manifest(path: &Path) -> Result<Vec<Recording>> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| Error::Table(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != MANIFEST_HEADER {
        return Err(Error::Table(format!(
            "{}: expected header {}",
            path.display(),
            MANIFEST_HEADER.join(",")
        )));
    }
    let mut recordings = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::ManifestRow {
            row,
            message: e.to_string(),
        })?;
        let rec = parse_manifest_row(&record, &base).map_err(|e| match e {
            Error::ManifestRow { .. } => e,
            other => Error::ManifestRow {
                row,
                message: other.to_string(),
            },
        })?;
        recordings.push(rec);
    }
    Ok(recordings)
}

fn parse_manifest_row(record: &csv::StringRecord, base: &Path) -> Result<Recording> {
    let cell = |i: usize| record.get(i).unwrap_or("").trim();
    let opt_num = |i: usize| -> Result<Option<f64>> {
        let c = cell(i);
        if c.is_empty() {
            Ok(None)
        } else {
            c.parse::<f64>()
                .map(Some)
                .map_err(|_| Error::InvalidInput(format!("column {} is not numeric: {c:?}", MANIFEST_HEADER[i])))
        }
    };
    let req_num = |i: usize| -> Result<f64> {
        opt_num(i)?.ok_or_else(|| Error::InvalidInput(format!("column {} is required", MANIFEST_HEADER[i])))
    };

    let patient_id = cell(0).to_string();
    if patient_id.is_empty() {
        return Err(Error::InvalidInput("empty patient_id".into()));
    }
    let signal_path = PathBuf::from(cell(1));
    let signal_path = if signal_path.is_absolute() {
        signal_path
    } else {
        base.join(signal_path)
    };
    let fs = opt_num(2)?.unwrap_or(1.0);
    let is_copd = match cell(3).to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => true,
        "0" | "false" | "no" => false,
        other => return Err(Error::InvalidInput(format!("is_copd must be 0/1, got {other:?}"))),
    };
    let gold = match opt_num(4)? {
        None => None,
        Some(g) => Some(
            Gold::from_number(g as u8)
                .filter(|_| g.fract() == 0.0)
                .ok_or_else(|| Error::InvalidInput(format!("gold must be 1-4, got {g}")))?,
        ),
    };
    let label = CopdLabel::new(is_copd, gold)?;
    let gender = match cell(5).to_ascii_lowercase().as_str() {
        "male" | "m" => Gender::Male,
        "female" | "f" => Gender::Female,
        other => {
            return Err(Error::InvalidInput(format!(
                "gender must be male/female, got {other:?}"
            )))
        }
    };
    let smoking_code = req_num(9)?;
    let smoking = Smoking::from_code(smoking_code as u8)
        .filter(|_| smoking_code.fract() == 0.0 && smoking_code >= 0.0)
        .ok_or_else(|| Error::InvalidInput(format!("smoking must be 0, 1 or 2, got {smoking_code}")))?;
    let demographics = Demographics {
        gender,
        age: req_num(6)?,
        weight: req_num(7)?,
        height: req_num(8)?,
        smoking,
    };
    let psg_cells: Vec<Option<f64>> = (10..19).map(opt_num).collect::<Result<_>>()?;
    let psg = if psg_cells.iter().all(Option::is_none) {
        None
    } else if psg_cells.iter().all(Option::is_some) {
        let v: Vec<f64> = psg_cells.into_iter().flatten().collect();
        Some(PsgFeatures {
            ahi: v[0],
            ai: v[1],
            hi: v[2],
            n1: v[3],
            n2: v[4],
            n3: v[5],
            rem: v[6],
            arousal: v[7],
            se: v[8],
        })
    } else {
        return Err(Error::InvalidInput(
            "PSG columns must be all present or all empty".into(),
        ));
    };

    if !signal_path.exists() {
        return Err(Error::InvalidInput(format!(
            "signal file {} does not exist",
            signal_path.display()
        )));
    }
    let samples = read_signal(&signal_path)?;
    let rec = Recording {
        patient_id,
        samples,
        fs,
        label,
        demographics,
        psg,
    };
    rec.validate()?;
    Ok(rec)
}

/// Writes a manifest. `signal_paths` are written verbatim (one per recording).
pub fn write_manifest(path: &Path, rows: &[(&Recording, String)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Table(e.to_string()))?;
    let table_err = |e: csv::Error| Error::Table(e.to_string());
    w.write_record(MANIFEST_HEADER).map_err(table_err)?;
    for (rec, signal_path) in rows {
        let d = &rec.demographics;
        let mut fields = vec![
            rec.patient_id.clone(),
            signal_path.clone(),
            format!("{}", rec.fs),
            rec.label.class().to_string(),
            rec.label.gold().map(|g| g.number().to_string()).unwrap_or_default(),
            match d.gender {
                Gender::Male => "male".into(),
                Gender::Female => "female".into(),
            },
            format!("{}", d.age),
            format!("{}", d.weight),
            format!("{}", d.height),
            d.smoking.code().to_string(),
        ];
        match &rec.psg {
            Some(p) => fields.extend(p.values().iter().map(|v| format!("{v}"))),
            None => fields.extend(std::iter::repeat_n(String::new(), 9)),
        }
        w.write_record(&fields).map_err(table_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
