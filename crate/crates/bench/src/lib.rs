//! Fixtures shared by the kernel benchmarks.

use oxiscreen::signal::{preprocess, preprocess_samples};
use oxiscreen::synth::{generate_samples, synth_patient};
use oxiscreen::{ProfileKind, Recording, SynthProfile};

/// Raw samples of a severe-OSA night of `hours` at 1 Hz.
pub fn osa_night(hours: f64, seed: u64) -> Vec<f64> {
    generate_samples(&SynthProfile::preset(ProfileKind::OsaSevere, seed), hours)
        .expect("preset generates")
        .0
}

/// The same night after range and median filtering.
pub fn clean_night(hours: f64, seed: u64) -> Vec<f64> {
    preprocess_samples(&osa_night(hours, seed)).expect("preprocesses")
}

/// A small preprocessed cohort alternating healthy and COPD-like patients.
pub fn cohort(n: usize) -> Vec<Recording> {
    (0..n)
        .map(|i| {
            let kind = if i % 2 == 0 {
                ProfileKind::Healthy
            } else {
                ProfileKind::CopdLike
            };
            let p = synth_patient(&format!("B{i:03}"), kind, i as u64).expect("preset generates");
            preprocess(&p.recording).expect("preprocesses")
        })
        .collect()
}

/// Two shifted Gaussian-ish classes for classifier fitting.
pub fn blobs(n: usize, dims: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
    let x = clean_night(1.0, 7);
    let rows = (0..n)
        .map(|i| {
            let shift = if i % 2 == 0 { 0.0 } else { 1.5 };
            (0..dims).map(|d| x[(i * dims + d) % x.len()] - 90.0 + shift).collect()
        })
        .collect();
    let labels = (0..n).map(|i| (i % 2) as u8).collect();
    (rows, labels)
}
