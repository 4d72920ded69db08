use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest row {row}: {message}")]
    ManifestRow { row: usize, message: String },

    #[error("malformed table: {0}")]
    Table(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("signal empty after preprocessing")]
    EmptyAfterPreprocessing,

    #[error("recording {patient_id} is shorter than one window ({samples} samples, need {required})")]
    RecordingTooShort {
        patient_id: String,
        samples: usize,
        required: usize,
    },

    #[error("signal too short: {0}")]
    SignalTooShort(String),

    #[error("model kind {0} needs PSG features but patient {1} has none")]
    MissingPsg(String, String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("stratification failed: {0}")]
    Stratification(String),

    #[error("model file: {0}")]
    ModelFile(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
