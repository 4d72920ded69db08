//! Complexity and periodicity biomarkers.

pub mod complexity;
pub mod entropy;
pub mod lz;
pub mod periodicity;

use serde::{Deserialize, Serialize};

pub use complexity::{ctm, dfa, dfa_alpha, fluctuation};
pub use entropy::{approx_entropy, sample_entropy};
pub use lz::lempel_ziv;
pub use periodicity::{prsa, spectral, Prsa, PsdMethod, PsdParams, Spectral};

use crate::error::Result;
use crate::warnings::Warnings;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsParams {
    /// Embedding dimension for ApEn and SampEn.
    pub entropy_m: usize,
    /// Tolerance r as a multiple of the signal SD.
    pub entropy_r_factor: f64,
    pub ctm_rho: f64,
    /// PRSA half-window (samples).
    pub prsa_d: usize,
    /// DFA box size (samples).
    pub dfa_scale: usize,
    pub psd: PsdParams,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            entropy_m: 1,
            entropy_r_factor: 0.25,
            ctm_rho: 0.25,
            prsa_d: 10,
            dfa_scale: 20,
            psd: PsdParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexityBiomarkers {
    pub apen: f64,
    pub lz: f64,
    pub ctm: f64,
    pub sampen: f64,
    pub dfa: f64,
}

impl ComplexityBiomarkers {
    pub const NAMES: [&'static str; 5] = ["ApEn", "LZ", "CTM", "SampEn", "DFA"];

    pub fn values(&self) -> [f64; 5] {
        [self.apen, self.lz, self.ctm, self.sampen, self.dfa]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PeriodicityBiomarkers {
    pub prsa: Prsa,
    pub spectral: Spectral,
}

impl PeriodicityBiomarkers {
    pub const NAMES: [&'static str; 10] = [
        "PRSA_c",
        "PRSA_ad",
        "PRSA_os",
        "PRSA_sb",
        "PRSA_sa",
        "AC",
        "PSD_total",
        "PSD_band",
        "PSD_ratio",
        "PSD_peak",
    ];

    pub fn values(&self) -> [f64; 10] {
        let p = &self.prsa;
        let s = &self.spectral;
        [
            p.capacity,
            p.amplitude_diff,
            p.overall_slope,
            p.slope_before,
            p.slope_after,
            s.ac,
            s.psd_total,
            s.psd_band,
            s.psd_ratio,
            s.psd_peak,
        ]
    }
}

pub fn complexity_biomarkers(signal: &[f64], params: &DynamicsParams) -> Result<(ComplexityBiomarkers, Warnings)> {
    let apen = approx_entropy(signal, params.entropy_m, params.entropy_r_factor)?;
    let (sampen, w) = sample_entropy(signal, params.entropy_m, params.entropy_r_factor)?;
    Ok((
        ComplexityBiomarkers {
            apen,
            lz: lempel_ziv(signal) as f64,
            ctm: ctm(signal, params.ctm_rho)?,
            sampen,
            dfa: dfa(signal, params.dfa_scale)?,
        },
        w,
    ))
}

pub fn periodicity_biomarkers(
    signal: &[f64],
    fs: f64,
    params: &DynamicsParams,
) -> Result<(PeriodicityBiomarkers, Warnings)> {
    let (prsa, w) = match prsa(signal, fs, params.prsa_d) {
        Some(p) => (p, Warnings::NONE),
        None => (Prsa::default(), Warnings::PRSA_NO_ANCHORS),
    };
    Ok((
        PeriodicityBiomarkers {
            prsa,
            spectral: spectral(signal, fs, &params.psd)?,
        },
        w,
    ))
}
