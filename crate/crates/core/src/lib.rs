//! Overnight oximetry biomarkers and COPD screening models.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod desat;
pub mod dynamics;
pub mod error;
pub mod features;
pub mod learn;
pub mod math;
pub mod pipeline;
pub mod select;
pub mod signal;
pub mod stats;
pub mod synth;
pub mod warnings;

pub use config::RunConfig;
pub use desat::{DesaturationEvent, RelativeDetector};
pub use error::{Error, Result};
pub use features::{BiomarkerParams, BiomarkerVector};
pub use learn::{ClassifierKind, CvParams, CvReport, StoredModel};
pub use pipeline::{FeatureMatrix, FeatureRow, ModelKind, Tiling};
pub use select::MrmrResult;
pub use signal::{CopdLabel, Demographics, Gold, PsgFeatures, Recording};
pub use synth::{ProfileKind, SynthProfile};
pub use warnings::Warnings;
