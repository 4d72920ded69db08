mod common;

use common::*;
use oxiscreen::desat::{detect_hard, hypoxic_burden, RelativeDetector};
use oxiscreen::signal::preprocess_samples;
use oxiscreen::stats::{stat_biomarkers, StatParams};
use oxiscreen::synth::{generate_samples, plant_log, synth_patient, PlantKind};
use oxiscreen::{math, ProfileKind, SynthProfile};

struct Score {
    recall: f64,
    precision: f64,
    per_hour: f64,
}

fn overlaps(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 < b.1 && b.0 < a.1
}

fn score(profile: &SynthProfile, hours: f64) -> Score {
    let (raw, log) = generate_samples(profile, hours).unwrap();
    let x = preprocess_samples(&raw).unwrap();
    let events = RelativeDetector::with_threshold(3.0).detect(&x, 1.0);
    let planted: Vec<(f64, f64)> = log
        .iter()
        .filter(|e| e.kind == PlantKind::Desat)
        .map(|e| (e.start_s, e.end_s))
        .collect();
    let found: Vec<(f64, f64)> = events.iter().map(|e| (e.start_idx as f64, e.end_idx as f64)).collect();
    let hit = planted
        .iter()
        .filter(|p| found.iter().any(|f| overlaps(**p, *f)))
        .count();
    let true_pos = found
        .iter()
        .filter(|f| planted.iter().any(|p| overlaps(*p, **f)))
        .count();
    Score {
        recall: hit as f64 / planted.len() as f64,
        precision: true_pos as f64 / found.len() as f64,
        per_hour: found.len() as f64 / hours,
    }
}

#[test]
fn relative_detector_recovers_planted_desaturations() {
    for kind in [ProfileKind::OsaMild, ProfileKind::OsaSevere, ProfileKind::OvsLike] {
        for seed in 0..5 {
            let s = score(&SynthProfile::preset(kind, seed), 8.0);
            assert!(s.recall >= 0.95, "{kind} seed {seed}: recall {}", s.recall);
            assert!(s.precision >= 0.95, "{kind} seed {seed}: precision {}", s.precision);
        }
    }
}

#[test]
fn severe_osa_rate_is_recovered() {
    for seed in 0..5 {
        let p = SynthProfile::preset(ProfileKind::OsaSevere, seed);
        let planted = plant_log(&p, 8.0).len() as f64 / 8.0;
        let s = score(&p, 8.0);
        assert!(
            (s.per_hour - 30.0).abs() <= 3.0,
            "seed {seed}: {} /h (planted {planted})",
            s.per_hour
        );
    }
}

#[test]
fn short_dips_inside_one_excursion() {
    let x = dips_in_excursion_trace();
    let relative = RelativeDetector::default().detect(&x, 1.0);
    let hard = detect_hard(&x, 1.0, None);
    assert!(relative.len() >= 3, "{relative:?}");
    assert_eq!(hard.len(), 1, "{hard:?}");
    let h = hard[0];
    let inside = relative
        .iter()
        .filter(|e| e.start_idx >= h.start_idx - 1 && e.end_idx <= h.end_idx)
        .count();
    assert!(inside >= 3);
    assert!(relative.iter().all(|e| e.duration_s <= 120.0));
}

#[test]
fn planted_hypoxemia_sets_ct90() {
    for seed in 0..5 {
        let p = SynthProfile {
            desat_rate: 0.0,
            ..SynthProfile::preset(ProfileKind::CopdLike, seed)
        };
        let (raw, log) = generate_samples(&p, 8.0).unwrap();
        let x = preprocess_samples(&raw).unwrap();
        let planted: f64 = log.iter().map(|e| e.end_s - e.start_s).sum::<f64>() / (8.0 * 3600.0);
        assert!((planted - 0.2).abs() < 1e-9, "{planted}");
        let ct = hypoxic_burden(&x, 1.0, &[], 90.0).ct;
        assert!((ct - 20.0).abs() <= 2.0, "seed {seed}: CT90 {ct}");
    }
}

#[test]
fn plant_log_arithmetic() {
    let healthy = SynthProfile::preset(ProfileKind::Healthy, 3);
    assert!(plant_log(&healthy, 8.0).is_empty());
    let p = SynthProfile::preset(ProfileKind::OsaMild, 3);
    let log = plant_log(&p, 8.0);
    let (_, again) = generate_samples(&p, 8.0).unwrap();
    assert_eq!(log, again);
    let union: f64 = log.iter().map(|e| e.end_s - e.start_s).sum();
    assert!(log.windows(2).all(|w| w[0].end_s <= w[1].start_s));
    assert!((union / (8.0 * 3600.0) - log.len() as f64 * p.desat_duration_s / 28800.0).abs() < 1e-12);
}

#[test]
fn copd_cohort_is_lower_and_more_hypoxemic_than_healthy() {
    let arm = |kind: ProfileKind, base: u64| -> (Vec<f64>, Vec<f64>) {
        (0..50)
            .map(|i| {
                let p = synth_patient(&format!("{kind}{i}"), kind, base + i).unwrap();
                let x = preprocess_samples(&p.recording.samples).unwrap();
                assert!(x.iter().all(|v| (50.0..=100.0).contains(v)));
                let (s, _) = stat_biomarkers(&x, 1.0, &StatParams::default());
                (s.med, hypoxic_burden(&x, 1.0, &[], 90.0).ct)
            })
            .unzip()
    };
    let (med_h, ct_h) = arm(ProfileKind::Healthy, 0);
    let (med_c, ct_c) = arm(ProfileKind::CopdLike, 1000);
    assert!(math::median(&med_c) < math::median(&med_h));
    assert!(math::median(&ct_c) > math::median(&ct_h));
}
