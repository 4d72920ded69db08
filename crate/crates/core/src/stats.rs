//! General-statistics biomarkers of an SpO2 series.

use serde::{Deserialize, Serialize};

use crate::math;
use crate::warnings::Warnings;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatParams {
    /// Percentile reported as P (in %).
    pub percentile: f64,
    /// M counts samples at least this many % below the median.
    pub below_median: f64,
    /// Crossing level for ZC; the signal median when unset.
    pub zc_level: Option<f64>,
    /// Delta-index segment length (s).
    pub delta_index_s: f64,
}

impl Default for StatParams {
    fn default() -> Self {
        StatParams {
            percentile: 1.0,
            below_median: 2.0,
            zc_level: None,
            delta_index_s: 12.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StatBiomarkers {
    pub av: f64,
    pub med: f64,
    pub min: f64,
    pub sd: f64,
    pub rg: f64,
    pub p: f64,
    pub m: f64,
    pub zc: f64,
    pub delta_i: f64,
}

impl StatBiomarkers {
    pub const NAMES: [&'static str; 9] = ["AV", "MED", "Min", "SD", "RG", "P", "M", "ZC", "DeltaI"];

    pub fn values(&self) -> [f64; 9] {
        [
            self.av,
            self.med,
            self.min,
            self.sd,
            self.rg,
            self.p,
            self.m,
            self.zc,
            self.delta_i,
        ]
    }
}

pub fn stat_biomarkers(signal: &[f64], fs: f64, params: &StatParams) -> (StatBiomarkers, Warnings) {
    let mut warnings = Warnings::NONE;
    if signal.is_empty() {
        return (StatBiomarkers::default(), warnings);
    }
    let n = signal.len() as f64;
    let sorted = math::sorted(signal);
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    let med = math::percentile_sorted(&sorted, 50.0);
    let m_level = med - params.below_median;
    let delta_i = match delta_index(signal, fs, params.delta_index_s) {
        Some(v) => v,
        None => {
            warnings.insert(Warnings::DELTA_INDEX_SHORT);
            0.0
        }
    };
    let bm = StatBiomarkers {
        av: math::mean(signal),
        med,
        min,
        sd: math::pop_sd(signal),
        rg: max - min,
        p: math::percentile_sorted(&sorted, params.percentile),
        m: 100.0 * signal.iter().filter(|&&s| s <= m_level).count() as f64 / n,
        zc: zero_crossings(signal, params.zc_level.unwrap_or(med)) as f64,
        delta_i,
    };
    (bm, warnings)
}

/// Number of adjacent pairs on strictly opposite sides of `level`. Samples
/// lying exactly on the level never count as a crossing.
pub fn zero_crossings(signal: &[f64], level: f64) -> usize {
    signal
        .windows(2)
        .filter(|w| {
            let a = w[0] - level;
            let b = w[1] - level;
            (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)
        })
        .count()
}

/// Mean absolute difference between the means of consecutive non-overlapping
/// `segment_s`-second segments (partial tail dropped). `None` when fewer than
/// two full segments fit.
pub fn delta_index(signal: &[f64], fs: f64, segment_s: f64) -> Option<f64> {
    let seg = (segment_s * fs).round() as usize;
    if seg == 0 || signal.len() < 2 * seg {
        return None;
    }
    let means: Vec<f64> = signal.chunks_exact(seg).map(math::mean).collect();
    let diffs: Vec<f64> = means.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    Some(math::mean(&diffs))
}
