//! Desaturation detection (relative drop from a local maximum, and hard
//! threshold at a fixed level) plus the desaturation and hypoxic-burden
//! biomarkers computed from the detected events.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::math;

/// One detected desaturation.
///
/// `end_idx` is exclusive: it is the first sample no longer in the event
/// (the recovery sample), so `duration_s = (end_idx - start_idx) / fs` and
/// consecutive events may share a boundary index without overlapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesaturationEvent {
    pub start_idx: usize,
    pub min_idx: usize,
    pub end_idx: usize,
    /// Reference level of the event (%).
    pub baseline: f64,
    pub min_value: f64,
    pub duration_s: f64,
    /// baseline - min (%)
    pub depth_max: f64,
    /// 100 - min (%)
    pub depth_100: f64,
    /// %/s, depth over time-to-nadir
    pub slope: f64,
    /// %·s between baseline and signal
    pub area_max: f64,
    /// %·s between 100 % and signal
    pub area_100: f64,
}

impl DesaturationEvent {
    /// Builds the event geometry over `signal[start..end]`.
    pub fn from_span(signal: &[f64], fs: f64, start: usize, end: usize, baseline: f64) -> Self {
        debug_assert!(start < end && end <= signal.len());
        let span = &signal[start..end];
        let (offset, min_value) =
            span.iter().copied().enumerate().fold(
                (0, f64::INFINITY),
                |(bi, bv), (i, v)| if v < bv { (i, v) } else { (bi, bv) },
            );
        let min_idx = start + offset;
        let depth_max = baseline - min_value;
        let fall_s = (min_idx - start) as f64 / fs;
        let slope = if fall_s > 0.0 {
            depth_max / fall_s
        } else {
            depth_max * fs
        };
        let area_max = span.iter().map(|s| baseline - s).sum::<f64>() / fs;
        let area_100 = span.iter().map(|s| 100.0 - s).sum::<f64>() / fs;
        DesaturationEvent {
            start_idx: start,
            min_idx,
            end_idx: end,
            baseline,
            min_value,
            duration_s: (end - start) as f64 / fs,
            depth_max,
            depth_100: 100.0 - min_value,
            slope,
            area_max,
            area_100,
        }
    }
}

/// Relative (ODI-style) detector settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RelativeDetector {
    /// Minimum drop below the baseline maximum (%).
    pub drop_threshold: f64,
    /// Events are truncated at this length (s).
    pub max_len_s: f64,
    /// An event starts once the signal falls below `baseline - recovery_margin`
    /// and closes at the first sample back at or above that level (%).
    pub recovery_margin: f64,
}

impl Default for RelativeDetector {
    fn default() -> Self {
        RelativeDetector {
            drop_threshold: 3.0,
            max_len_s: 120.0,
            recovery_margin: 1.0,
        }
    }
}

impl RelativeDetector {
    pub fn with_threshold(drop_threshold: f64) -> Self {
        RelativeDetector {
            drop_threshold,
            ..Default::default()
        }
    }

    /// Left-to-right scan. A candidate opens at a local maximum `b` (the last
    /// sample before a fall). The excursion begins when the signal drops below
    /// `b - recovery_margin` without first rising above `b`, and closes at the
    /// first sample recovering to `>= b - recovery_margin`, or at the length
    /// cap. The excursion is an event when its minimum is `<= b - drop_threshold`.
    /// Scanning resumes at the event end.
    pub fn detect(&self, signal: &[f64], fs: f64) -> Vec<DesaturationEvent> {
        let n = signal.len();
        let cap = ((self.max_len_s * fs).floor() as usize).max(1);
        let mut events = Vec::new();
        let mut i = 0;
        while i + 1 < n {
            let is_peak = signal[i + 1] < signal[i] && (i == 0 || signal[i] >= signal[i - 1]);
            if !is_peak {
                i += 1;
                continue;
            }
            match self.excursion(signal, i, cap) {
                Some((end, min)) if min <= signal[i] - self.drop_threshold => {
                    events.push(DesaturationEvent::from_span(signal, fs, i, end, signal[i]));
                    i = end;
                }
                _ => i += 1,
            }
        }
        events
    }

    /// Returns the exclusive end and the minimum of the excursion opened at
    /// `start`, if one exists within the cap.
    fn excursion(&self, signal: &[f64], start: usize, cap: usize) -> Option<(usize, f64)> {
        let baseline = signal[start];
        let level = baseline - self.recovery_margin;
        let limit = signal.len().min(start + cap);
        let mut j = start + 1;
        while j < limit {
            let s = signal[j];
            if s > baseline {
                return None;
            }
            if s < level {
                break;
            }
            j += 1;
        }
        if j >= limit {
            return None;
        }
        let mut min = signal[j];
        let mut k = j + 1;
        while k < limit && signal[k] < level {
            min = min.min(signal[k]);
            k += 1;
        }
        Some((k, min))
    }
}

/// Relative detection with the default settings and a given drop threshold.
pub fn detect_relative(signal: &[f64], fs: f64, drop_threshold: f64, max_len_s: f64) -> Vec<DesaturationEvent> {
    RelativeDetector {
        drop_threshold,
        max_len_s,
        ..Default::default()
    }
    .detect(signal, fs)
}

/// Hard-threshold detection: maximal runs of at least two consecutive samples
/// strictly below `level` (defaults to the median of `signal`). No length cap.
pub fn detect_hard(signal: &[f64], fs: f64, level: Option<f64>) -> Vec<DesaturationEvent> {
    let level = level.unwrap_or_else(|| math::median(signal));
    let n = signal.len();
    let mut events = Vec::new();
    let mut i = 0;
    while i < n {
        if signal[i] < level {
            let start = i;
            while i < n && signal[i] < level {
                i += 1;
            }
            if i - start >= 2 {
                events.push(DesaturationEvent::from_span(signal, fs, start, i, level));
            }
        } else {
            i += 1;
        }
    }
    events
}

/// Desaturation biomarkers (mean and population SD of the event geometry).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DesatBiomarkers {
    /// events per hour
    pub odi: f64,
    pub dl_mu: f64,
    pub dl_sd: f64,
    pub ddmax_mu: f64,
    pub ddmax_sd: f64,
    pub dd100_mu: f64,
    pub dd100_sd: f64,
    pub ds_mu: f64,
    pub ds_sd: f64,
    pub damax_mu: f64,
    pub damax_sd: f64,
    pub da100_mu: f64,
    pub da100_sd: f64,
    pub td_mu: f64,
    pub td_sd: f64,
}

impl DesatBiomarkers {
    pub const NAMES: [&'static str; 15] = [
        "ODI", "DL_mu", "DL_sd", "DDmax_mu", "DDmax_sd", "DD100_mu", "DD100_sd", "DS_mu", "DS_sd", "DAmax_mu",
        "DAmax_sd", "DA100_mu", "DA100_sd", "TD_mu", "TD_sd",
    ];

    pub fn values(&self) -> [f64; 15] {
        [
            self.odi,
            self.dl_mu,
            self.dl_sd,
            self.ddmax_mu,
            self.ddmax_sd,
            self.dd100_mu,
            self.dd100_sd,
            self.ds_mu,
            self.ds_sd,
            self.damax_mu,
            self.damax_sd,
            self.da100_mu,
            self.da100_sd,
            self.td_mu,
            self.td_sd,
        ]
    }
}

pub fn desat_biomarkers(events: &[DesaturationEvent], signal: &[f64], fs: f64) -> DesatBiomarkers {
    if events.is_empty() || signal.is_empty() {
        return DesatBiomarkers::default();
    }
    let hours = signal.len() as f64 / fs / 3600.0;
    let col = |f: fn(&DesaturationEvent) -> f64| -> (f64, f64) {
        let xs: Vec<f64> = events.iter().map(f).collect();
        math::mean_sd(&xs)
    };
    let (dl_mu, dl_sd) = col(|e| e.duration_s);
    let (ddmax_mu, ddmax_sd) = col(|e| e.depth_max);
    let (dd100_mu, dd100_sd) = col(|e| e.depth_100);
    let (ds_mu, ds_sd) = col(|e| e.slope);
    let (damax_mu, damax_sd) = col(|e| e.area_max);
    let (da100_mu, da100_sd) = col(|e| e.area_100);
    let gaps: Vec<f64> = events
        .windows(2)
        .map(|w| (w[1].start_idx as f64 - w[0].end_idx as f64) / fs)
        .collect();
    let (td_mu, td_sd) = math::mean_sd(&gaps);
    DesatBiomarkers {
        odi: events.len() as f64 / hours,
        dl_mu,
        dl_sd,
        ddmax_mu,
        ddmax_sd,
        dd100_mu,
        dd100_sd,
        ds_mu,
        ds_sd,
        damax_mu,
        damax_sd,
        da100_mu,
        da100_sd,
        td_mu,
        td_sd,
    }
}

/// Time and area spent in desaturation, normalised by recording length, plus
/// the cumulative time and area below a fixed saturation level.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HypoxicBurden {
    /// fraction of time in desaturation
    pub pod: f64,
    pub aod_max: f64,
    pub aod_100: f64,
    /// % of samples below the level
    pub ct: f64,
    /// mean deficit below the level (%)
    pub ca: f64,
}

impl HypoxicBurden {
    pub const NAMES: [&'static str; 5] = ["POD", "AODmax", "AOD100", "CT", "CA"];

    pub fn values(&self) -> [f64; 5] {
        [self.pod, self.aod_max, self.aod_100, self.ct, self.ca]
    }
}

pub fn hypoxic_burden(signal: &[f64], fs: f64, events: &[DesaturationEvent], level: f64) -> HypoxicBurden {
    if signal.is_empty() {
        return HypoxicBurden::default();
    }
    let n = signal.len() as f64;
    let total_s = n / fs;
    HypoxicBurden {
        pod: events.iter().map(|e| e.duration_s).sum::<f64>() / total_s,
        aod_max: events.iter().map(|e| e.area_max).sum::<f64>() / total_s,
        aod_100: events.iter().map(|e| e.area_100).sum::<f64>() / total_s,
        ct: 100.0 * signal.iter().filter(|&&s| s < level).count() as f64 / n,
        ca: signal.iter().map(|&s| (level - s).max(0.0)).sum::<f64>() / n,
    }
}

/// Debug dump of detected events as comma-separated rows.
pub fn write_events_csv<W: Write>(mut out: W, events: &[DesaturationEvent]) -> std::io::Result<()> {
    writeln!(
        out,
        "start_idx,min_idx,end_idx,baseline,min_value,depth_max,slope,area_max,area_100"
    )?;
    for e in events {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            e.start_idx, e.min_idx, e.end_idx, e.baseline, e.min_value, e.depth_max, e.slope, e.area_max, e.area_100
        )?;
    }
    Ok(())
}
