//! Central tendency measure and detrended fluctuation analysis.

use crate::error::{Error, Result};
use crate::math;

/// Share of consecutive first-difference pairs `(d_i, d_{i+1})` lying strictly
/// inside radius `rho` of the origin.
pub fn ctm(signal: &[f64], rho: f64) -> Result<f64> {
    if signal.len() < 3 {
        return Err(Error::SignalTooShort(format!(
            "CTM needs at least 3 samples, got {}",
            signal.len()
        )));
    }
    let d: Vec<f64> = signal.windows(2).map(|w| w[1] - w[0]).collect();
    let inside = d.windows(2).filter(|p| p[0].hypot(p[1]) < rho).count();
    Ok(inside as f64 / (d.len() - 1) as f64)
}

/// Root-mean-square residual of the integrated, mean-centred signal after a
/// least-squares line is removed from each non-overlapping box of `scale`
/// samples (partial tail dropped).
pub fn fluctuation(signal: &[f64], scale: usize) -> Result<f64> {
    if scale < 2 || signal.len() < scale {
        return Err(Error::SignalTooShort(format!(
            "DFA at scale {scale} needs at least {scale} samples, got {}",
            signal.len()
        )));
    }
    let mu = math::mean(signal);
    let mut acc = 0.0;
    let profile: Vec<f64> = signal
        .iter()
        .map(|s| {
            acc += s - mu;
            acc
        })
        .collect();

    // Box abscissae 0..scale are shared, so the fit uses closed forms.
    let t_mean = (scale - 1) as f64 / 2.0;
    let t_ss: f64 = (0..scale).map(|t| (t as f64 - t_mean).powi(2)).sum();
    let mut sq = 0.0;
    let mut count = 0usize;
    for seg in profile.chunks_exact(scale) {
        let y_mean = math::mean(seg);
        let cov: f64 = seg
            .iter()
            .enumerate()
            .map(|(t, y)| (t as f64 - t_mean) * (y - y_mean))
            .sum();
        let slope = cov / t_ss;
        for (t, y) in seg.iter().enumerate() {
            let fit = y_mean + slope * (t as f64 - t_mean);
            sq += (y - fit).powi(2);
        }
        count += scale;
    }
    Ok((sq / count as f64).sqrt())
}

/// DFA biomarker: fluctuation at a single scale. Requires `n >= 4 * scale`.
pub fn dfa(signal: &[f64], scale: usize) -> Result<f64> {
    if signal.len() < 4 * scale {
        return Err(Error::SignalTooShort(format!(
            "DFA at scale {scale} needs at least {} samples, got {}",
            4 * scale,
            signal.len()
        )));
    }
    fluctuation(signal, scale)
}

/// Scaling exponent: log-log least-squares slope of F(n) over `scales`.
pub fn dfa_alpha(signal: &[f64], scales: &[usize]) -> Result<f64> {
    let mut xs = Vec::with_capacity(scales.len());
    let mut ys = Vec::with_capacity(scales.len());
    for &s in scales {
        let f = fluctuation(signal, s)?;
        xs.push((s as f64).ln());
        ys.push(f.ln());
    }
    Ok(math::ls_slope(&xs, &ys))
}
