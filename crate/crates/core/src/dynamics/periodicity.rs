//! Phase-rectified signal averaging, lag-1 autocorrelation and the spectral
//! biomarkers.

use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prsa {
    pub capacity: f64,
    pub amplitude_diff: f64,
    pub overall_slope: f64,
    pub slope_before: f64,
    pub slope_after: f64,
}

/// Averaged anchor-aligned template `⟨s⟩(k)` for `k = -d..=d`, and the anchor
/// count. Anchors are samples lower than their predecessor whose full window
/// fits in the signal.
pub fn prsa_template(signal: &[f64], d: usize) -> (Vec<f64>, usize) {
    let n = signal.len();
    let mut acc = vec![0.0; 2 * d + 1];
    let mut anchors = 0usize;
    for i in d.max(1)..n.saturating_sub(d) {
        if signal[i] < signal[i - 1] {
            for (a, s) in acc.iter_mut().zip(&signal[i - d..=i + d]) {
                *a += s;
            }
            anchors += 1;
        }
    }
    if anchors > 0 {
        acc.iter_mut().for_each(|a| *a /= anchors as f64);
    }
    (acc, anchors)
}

/// PRSA summary values, or `None` when there is no usable anchor.
pub fn prsa(signal: &[f64], fs: f64, d: usize) -> Option<Prsa> {
    if d < 2 {
        return None;
    }
    let (t, anchors) = prsa_template(signal, d);
    if anchors == 0 {
        return None;
    }
    let at = |k: isize| t[(d as isize + k) as usize];
    let secs: Vec<f64> = (-(d as isize)..=d as isize).map(|k| k as f64 / fs).collect();
    let (lo, hi) = t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    Some(Prsa {
        capacity: (at(0) + at(1) - at(-1) - at(-2)) / 4.0,
        amplitude_diff: hi - lo,
        overall_slope: math::ls_slope(&secs, &t),
        slope_before: math::ls_slope(&secs[..=d], &t[..=d]),
        slope_after: math::ls_slope(&secs[d..], &t[d..]),
    })
}

/// Lag-1 mean product `Σ s_i s_{i+1} / n`; the mean is not removed.
pub fn autocorrelation_lag1(signal: &[f64]) -> f64 {
    if signal.is_empty() {
        return 0.0;
    }
    signal.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / signal.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsdMethod {
    /// Averaged Hann-tapered periodogram over overlapping segments.
    Welch,
    /// Single rectangular-window periodogram of the whole signal.
    Periodogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsdParams {
    pub method: PsdMethod,
    pub segment_len: usize,
    pub overlap: f64,
    /// Band edges (Hz), inclusive.
    pub band_lo: f64,
    pub band_hi: f64,
}

impl Default for PsdParams {
    fn default() -> Self {
        PsdParams {
            method: PsdMethod::Welch,
            segment_len: 512,
            overlap: 0.5,
            band_lo: 0.014,
            band_hi: 0.033,
        }
    }
}

/// One-sided power spectral density (%²/Hz) at `freqs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub density: Vec<f64>,
    /// Bin width (Hz).
    pub df: f64,
}

impl Psd {
    /// Integral over bins with `lo <= f <= hi`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        self.freqs
            .iter()
            .zip(&self.density)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(_, p)| p * self.df)
            .sum()
    }

    pub fn peak(&self, lo: f64, hi: f64) -> f64 {
        self.freqs
            .iter()
            .zip(&self.density)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(_, p)| *p)
            .fold(0.0, f64::max)
    }

    /// Integral over (0, fs/2].
    pub fn total(&self) -> f64 {
        self.freqs
            .iter()
            .zip(&self.density)
            .filter(|(f, _)| **f > 0.0)
            .map(|(_, p)| p * self.df)
            .sum()
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Accumulates `|X_k|²` of the mean-removed, tapered segment into `acc`.
fn add_power(segment: &[f64], taper: &[f64], acc: &mut [f64]) {
    let mu = math::mean(segment);
    let mut buf: Vec<Complex<f64>> = segment
        .iter()
        .zip(taper)
        .map(|(s, w)| Complex::new((s - mu) * w, 0.0))
        .collect();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(&mut buf);
    for (a, x) in acc.iter_mut().zip(&buf) {
        *a += x.norm_sqr();
    }
}

pub fn power_spectral_density(signal: &[f64], fs: f64, params: &PsdParams) -> Result<Psd> {
    let n = signal.len();
    if n < 2 {
        return Err(Error::SignalTooShort("PSD needs at least 2 samples".into()));
    }
    let (len, taper): (usize, Vec<f64>) = match params.method {
        PsdMethod::Periodogram => (n, vec![1.0; n]),
        PsdMethod::Welch => {
            let len = params.segment_len.min(n).max(2);
            let taper = (0..len)
                .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / len as f64).cos())
                .collect();
            (len, taper)
        }
    };
    let step = match params.method {
        PsdMethod::Periodogram => n,
        PsdMethod::Welch => ((len as f64 * (1.0 - params.overlap)).round() as usize).max(1),
    };
    let half = len / 2;
    let mut acc = vec![0.0; half + 1];
    let mut segments = 0usize;
    let mut start = 0;
    while start + len <= n {
        add_power(&signal[start..start + len], &taper, &mut acc);
        segments += 1;
        start += step;
    }
    let w_ss: f64 = taper.iter().map(|w| w * w).sum();
    let scale = 1.0 / (fs * w_ss * segments as f64);
    let density: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let one_sided = if k == 0 || (len % 2 == 0 && k == half) {
                1.0
            } else {
                2.0
            };
            p * scale * one_sided
        })
        .collect();
    let df = fs / len as f64;
    Ok(Psd {
        freqs: (0..=half).map(|k| k as f64 * df).collect(),
        density,
        df,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Spectral {
    pub ac: f64,
    pub psd_total: f64,
    pub psd_band: f64,
    pub psd_ratio: f64,
    pub psd_peak: f64,
}

pub fn spectral(signal: &[f64], fs: f64, params: &PsdParams) -> Result<Spectral> {
    if signal.len() < 64 {
        return Err(Error::SignalTooShort(format!(
            "spectral biomarkers need at least 64 samples, got {}",
            signal.len()
        )));
    }
    if fs / 2.0 < params.band_hi {
        return Err(Error::InvalidInput(format!(
            "Nyquist frequency {} Hz is below the band edge {} Hz",
            fs / 2.0,
            params.band_hi
        )));
    }
    let psd = power_spectral_density(signal, fs, params)?;
    let total = psd.total();
    let band = psd.integral(params.band_lo, params.band_hi);
    Ok(Spectral {
        ac: autocorrelation_lag1(signal),
        psd_total: total,
        psd_band: band,
        psd_ratio: if total > 0.0 { band / total } else { 0.0 },
        psd_peak: psd.peak(params.band_lo, params.band_hi),
    })
}
