//! The 59-value oximetry biomarker vector computed over one scope (a window or
//! a whole recording).

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::desat::{self, DesatBiomarkers, HypoxicBurden, RelativeDetector};
use crate::dynamics::{self, ComplexityBiomarkers, DynamicsParams, PeriodicityBiomarkers};
use crate::error::Result;
use crate::math;
use crate::stats::{self, StatBiomarkers, StatParams};
use crate::warnings::Warnings;

/// Number of oximetry biomarkers per scope.
pub const N_BIOMARKERS: usize = 59;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BiomarkerParams {
    pub stats: StatParams,
    pub relative: RelativeDetector,
    /// Level for CT and CA (%).
    pub hypoxic_level: f64,
    pub dynamics: DynamicsParams,
}

impl Default for BiomarkerParams {
    fn default() -> Self {
        BiomarkerParams {
            stats: StatParams::default(),
            relative: RelativeDetector::default(),
            hypoxic_level: 90.0,
            dynamics: DynamicsParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiomarkerVector {
    pub stats: StatBiomarkers,
    pub complexity: ComplexityBiomarkers,
    pub periodicity: PeriodicityBiomarkers,
    pub relative: DesatBiomarkers,
    pub hard: DesatBiomarkers,
    pub hypoxic: HypoxicBurden,
    pub warnings: Warnings,
}

/// Canonical biomarker names in column order.
pub fn biomarker_names() -> &'static [String] {
    static NAMES: OnceLock<Vec<String>> = OnceLock::new();
    NAMES.get_or_init(|| {
        let mut names: Vec<String> = StatBiomarkers::NAMES
            .iter()
            .chain(&ComplexityBiomarkers::NAMES)
            .chain(&PeriodicityBiomarkers::NAMES)
            .map(|s| s.to_string())
            .collect();
        for suffix in ["_rel", "_hard"] {
            names.extend(DesatBiomarkers::NAMES.iter().map(|s| format!("{s}{suffix}")));
        }
        names.extend(HypoxicBurden::NAMES.iter().map(|s| s.to_string()));
        names
    })
}

impl BiomarkerVector {
    pub fn values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(N_BIOMARKERS);
        v.extend(self.stats.values());
        v.extend(self.complexity.values());
        v.extend(self.periodicity.values());
        v.extend(self.relative.values());
        v.extend(self.hard.values());
        v.extend(self.hypoxic.values());
        v
    }
}

/// Computes every biomarker of a preprocessed signal.
pub fn biomarkers(signal: &[f64], fs: f64, params: &BiomarkerParams) -> Result<BiomarkerVector> {
    let (stats, w_stats) = stats::stat_biomarkers(signal, fs, &params.stats);
    let (complexity, w_cx) = dynamics::complexity_biomarkers(signal, &params.dynamics)?;
    let (periodicity, w_per) = dynamics::periodicity_biomarkers(signal, fs, &params.dynamics)?;
    let rel_events = params.relative.detect(signal, fs);
    let hard_events = desat::detect_hard(signal, fs, Some(math::median(signal)));
    Ok(BiomarkerVector {
        stats,
        complexity,
        periodicity,
        relative: desat::desat_biomarkers(&rel_events, signal, fs),
        hard: desat::desat_biomarkers(&hard_events, signal, fs),
        hypoxic: desat::hypoxic_burden(signal, fs, &rel_events, params.hypoxic_level),
        warnings: w_stats | w_cx | w_per,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_complete() {
        let names = biomarker_names();
        assert_eq!(names.len(), N_BIOMARKERS);
        let mut sorted = names.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), N_BIOMARKERS);
        assert!(names.contains(&"ODI_rel".to_string()));
        assert!(names.contains(&"TD_sd_hard".to_string()));
    }

    #[test]
    fn vector_is_finite_on_a_noisy_trace() {
        let x: Vec<f64> = (0..7200)
            .map(|i| {
                94.0 + ((i * 7919 % 13) as f64 - 6.0) * 0.1 - if (300..330).contains(&(i % 600)) { 5.0 } else { 0.0 }
            })
            .collect();
        let v = biomarkers(&x, 1.0, &BiomarkerParams::default()).unwrap();
        let vals = v.values();
        assert_eq!(vals.len(), N_BIOMARKERS);
        assert!(vals.iter().all(|x| x.is_finite()));
        assert!((v.relative.odi - 6.0).abs() < 1e-9, "{}", v.relative.odi);
    }

    #[test]
    fn constant_trace_flags_prsa() {
        let v = biomarkers(&[95.0; 7200], 1.0, &BiomarkerParams::default()).unwrap();
        assert!(v.warnings.contains(Warnings::PRSA_NO_ANCHORS));
        assert!(v.values().iter().all(|x| x.is_finite()));
    }
}
