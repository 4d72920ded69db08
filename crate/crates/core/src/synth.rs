//! Synthetic overnight SpO2 cohorts with a log of every planted event.
//!
//! A trace is `baseline - hypoxemia(t) - sum of desaturations(t) + noise`,
//! clipped to [50, 100] and quantized to 0.1 %. Desaturations are trapezoids
//! (fall, nadir plateau of at least 5 s, recovery) arriving as a Poisson
//! process with a refractory gap. Sustained hypoxemia is a plateau during the
//! REM-like tail of each sleep cycle.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{self, CopdLabel, Demographics, Gender, Gold, PsgFeatures, Recording, Smoking};

/// Sampling rate of generated traces (Hz).
pub const SYNTH_FS: f64 = 1.0;
/// Nominal sleep-cycle length (s); the realized length divides the night evenly.
pub const CYCLE_S: f64 = 5400.0;
/// Minimum baseline time between planted desaturations (s).
pub const REFRACTORY_S: f64 = 15.0;
/// Nadir plateau of each desaturation (s).
pub const NADIR_S: f64 = 6.0;
/// Ramp into and out of a hypoxemic plateau (s), centred on its boundaries.
pub const PLATEAU_RAMP_S: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Healthy,
    OsaMild,
    OsaSevere,
    CopdLike,
    OvsLike,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 5] = [
        ProfileKind::Healthy,
        ProfileKind::OsaMild,
        ProfileKind::OsaSevere,
        ProfileKind::CopdLike,
        ProfileKind::OvsLike,
    ];

    pub fn is_copd(self) -> bool {
        matches!(self, ProfileKind::CopdLike | ProfileKind::OvsLike)
    }

    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Healthy => "healthy",
            ProfileKind::OsaMild => "osa_mild",
            ProfileKind::OsaSevere => "osa_severe",
            ProfileKind::CopdLike => "copd_like",
            ProfileKind::OvsLike => "ovs_like",
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProfileKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown profile `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthProfile {
    pub kind: ProfileKind,
    /// %
    pub baseline: f64,
    /// events per hour
    pub desat_rate: f64,
    /// Minimum depth of a planted desaturation (%); each adds U(0, 1).
    pub desat_depth: f64,
    pub desat_duration_s: f64,
    /// Drop of the hypoxemic plateau below baseline (%).
    pub sustained_hypoxemia_depth: f64,
    /// Share of each sleep cycle spent in the hypoxemic plateau.
    pub rem_cluster_fraction: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl SynthProfile {
    /// Nominal parameters of a profile kind.
    pub fn preset(kind: ProfileKind, seed: u64) -> SynthProfile {
        let base = SynthProfile {
            kind,
            baseline: 96.0,
            desat_rate: 0.0,
            desat_depth: 3.0,
            desat_duration_s: 30.0,
            sustained_hypoxemia_depth: 0.0,
            rem_cluster_fraction: 0.0,
            noise_sd: 0.3,
            seed,
        };
        match kind {
            ProfileKind::Healthy => base,
            ProfileKind::OsaMild => SynthProfile {
                baseline: 95.5,
                desat_rate: 10.0,
                desat_depth: 3.5,
                ..base
            },
            ProfileKind::OsaSevere => SynthProfile {
                baseline: 95.0,
                desat_rate: 30.0,
                desat_depth: 3.5,
                desat_duration_s: 25.0,
                ..base
            },
            ProfileKind::CopdLike => SynthProfile {
                baseline: 92.5,
                desat_rate: 2.0,
                desat_depth: 3.0,
                sustained_hypoxemia_depth: 5.0,
                rem_cluster_fraction: 0.2,
                ..base
            },
            ProfileKind::OvsLike => SynthProfile {
                baseline: 92.5,
                desat_rate: 20.0,
                desat_depth: 3.5,
                desat_duration_s: 25.0,
                sustained_hypoxemia_depth: 5.0,
                rem_cluster_fraction: 0.2,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.baseline > 50.0 && self.baseline <= 100.0) {
            return Err(Error::InvalidInput(format!(
                "baseline {} outside (50, 100]",
                self.baseline
            )));
        }
        let non_negative = [
            self.desat_rate,
            self.desat_depth,
            self.desat_duration_s,
            self.sustained_hypoxemia_depth,
            self.rem_cluster_fraction,
            self.noise_sd,
        ];
        if non_negative.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || self.rem_cluster_fraction > 1.0 {
            return Err(Error::InvalidInput(
                "profile rates, depths and durations must be >= 0".into(),
            ));
        }
        if self.desat_rate > 0.0 && self.desat_duration_s < NADIR_S + 2.0 {
            return Err(Error::InvalidInput(format!(
                "desaturations must last at least {} s",
                NADIR_S + 2.0
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantKind {
    Desat,
    Hypoxemia,
}

impl fmt::Display for PlantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlantKind::Desat => "desat",
            PlantKind::Hypoxemia => "hypoxemia",
        })
    }
}

/// A planted interval `[start_s, end_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedEvent {
    pub start_s: f64,
    pub end_s: f64,
    pub kind: PlantKind,
    /// Planted drop below the local level (%).
    pub depth: f64,
}

/// Planted intervals of a profile over `duration_h` hours, in start order.
pub fn plant_log(profile: &SynthProfile, duration_h: f64) -> Vec<PlantedEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    rng.set_stream(1);
    let total = duration_h * 3600.0;
    let mut events = Vec::new();

    if profile.rem_cluster_fraction > 0.0 && profile.sustained_hypoxemia_depth > 0.0 {
        let cycles = (total / CYCLE_S).round().max(1.0);
        let cycle = total / cycles;
        let len = cycle * profile.rem_cluster_fraction;
        for c in 0..cycles as usize {
            let end = (c + 1) as f64 * cycle;
            events.push(PlantedEvent {
                start_s: (end - len).round(),
                end_s: end.round(),
                kind: PlantKind::Hypoxemia,
                depth: profile.sustained_hypoxemia_depth,
            });
        }
    }

    if profile.desat_rate > 0.0 {
        let dur = profile.desat_duration_s.round();
        let mean_gap = (3600.0 / profile.desat_rate - dur - REFRACTORY_S).max(1.0);
        let gap = Exp::new(1.0 / mean_gap).expect("positive rate");
        let mut t = REFRACTORY_S + gap.sample(&mut rng);
        while t.round() + dur <= total - REFRACTORY_S {
            let start = t.round();
            events.push(PlantedEvent {
                start_s: start,
                end_s: start + dur,
                kind: PlantKind::Desat,
                depth: profile.desat_depth + rng.random::<f64>(),
            });
            t = start + dur + REFRACTORY_S + gap.sample(&mut rng);
        }
    }
    events.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
    events
}

/// Drop (%) contributed by one planted event at time `t`.
fn shape(e: &PlantedEvent, t: f64) -> f64 {
    match e.kind {
        PlantKind::Hypoxemia => {
            let h = PLATEAU_RAMP_S / 2.0;
            if t <= e.start_s - h || t >= e.end_s + h {
                0.0
            } else if t < e.start_s + h {
                e.depth * (t - (e.start_s - h)) / PLATEAU_RAMP_S
            } else if t > e.end_s - h {
                e.depth * ((e.end_s + h) - t) / PLATEAU_RAMP_S
            } else {
                e.depth
            }
        }
        PlantKind::Desat => {
            if t < e.start_s || t >= e.end_s {
                return 0.0;
            }
            let dur = e.end_s - e.start_s;
            let fall = ((dur - NADIR_S) * 0.4).max(1.0);
            let rise = (dur - NADIR_S - fall).max(1.0);
            let x = t - e.start_s;
            if x < fall {
                e.depth * (x + 1.0) / (fall + 1.0)
            } else if x < fall + NADIR_S {
                e.depth
            } else {
                e.depth * (1.0 - (x - fall - NADIR_S + 1.0) / (rise + 1.0)).max(0.0)
            }
        }
    }
}

fn quantize(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// SpO2 samples of a profile over `duration_h` hours at 1 Hz.
pub fn generate_samples(profile: &SynthProfile, duration_h: f64) -> Result<(Vec<f64>, Vec<PlantedEvent>)> {
    profile.validate()?;
    if !(duration_h > 0.0) {
        return Err(Error::InvalidInput(format!("duration must be > 0 h, got {duration_h}")));
    }
    let log = plant_log(profile, duration_h);
    let n = (duration_h * 3600.0 * SYNTH_FS).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    rng.set_stream(2);
    let noise = Normal::new(0.0, profile.noise_sd).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut x = vec![profile.baseline; n];
    for e in &log {
        let lo = ((e.start_s - PLATEAU_RAMP_S).max(0.0) * SYNTH_FS) as usize;
        let hi = (((e.end_s + PLATEAU_RAMP_S) * SYNTH_FS).ceil() as usize).min(n);
        for (i, v) in x.iter_mut().enumerate().take(hi).skip(lo) {
            *v -= shape(e, i as f64 / SYNTH_FS);
        }
    }
    for v in &mut x {
        let eps = if profile.noise_sd > 0.0 {
            noise.sample(&mut rng)
        } else {
            0.0
        };
        *v = quantize((*v + eps).clamp(signal::SPO2_MIN, signal::SPO2_MAX));
    }
    Ok((x, log))
}

fn clamp_normal<R: Rng>(rng: &mut R, mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    let v: f64 = Normal::new(mean, sd).expect("valid normal").sample(rng);
    v.clamp(lo, hi)
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Label, demographics and PSG summary drawn for a profile kind.
pub fn draw_covariates<R: Rng>(kind: ProfileKind, rng: &mut R) -> (CopdLabel, Demographics, PsgFeatures) {
    let copd = kind.is_copd();
    let label = if copd {
        let u: f64 = rng.random();
        let gold = match u {
            u if u < 0.3 => Gold::G1,
            u if u < 0.7 => Gold::G2,
            u if u < 0.9 => Gold::G3,
            _ => Gold::G4,
        };
        CopdLabel::copd(Some(gold))
    } else {
        CopdLabel::non_copd()
    };
    let male = rng.random::<f64>() < if copd { 0.6 } else { 0.5 };
    let gender = if male { Gender::Male } else { Gender::Female };
    let age = if copd {
        clamp_normal(rng, 64.0, 9.0, 40.0, 90.0)
    } else {
        clamp_normal(rng, 56.0, 11.0, 20.0, 90.0)
    };
    let height = if male {
        clamp_normal(rng, 176.0, 7.0, 150.0, 205.0)
    } else {
        clamp_normal(rng, 163.0, 7.0, 140.0, 190.0)
    };
    let weight = clamp_normal(rng, if male { 86.0 } else { 74.0 }, 14.0, 45.0, 160.0);
    let u: f64 = rng.random();
    let (p_non, p_cur) = if copd { (0.15, 0.40) } else { (0.45, 0.25) };
    let smoking = if u < p_non {
        Smoking::NonSmoker
    } else if u < p_non + p_cur {
        Smoking::Smoker
    } else {
        Smoking::ExSmoker
    };

    let ahi = match kind {
        ProfileKind::Healthy => rng.random_range(0.0..5.0),
        ProfileKind::OsaMild => rng.random_range(5.0..15.0),
        ProfileKind::OsaSevere => rng.random_range(30.0..60.0),
        ProfileKind::CopdLike => rng.random_range(0.0..10.0),
        ProfileKind::OvsLike => rng.random_range(15.0..40.0),
    };
    let ai = ahi * rng.random_range(0.2..0.6);
    let stages: [f64; 4] = [
        rng.random_range(5.0..15.0),
        rng.random_range(40.0..55.0),
        rng.random_range(10.0..20.0),
        rng.random_range(15.0..25.0),
    ];
    let total: f64 = stages.iter().sum();
    let [n1, n2, n3, rem] = stages.map(|s| round1(100.0 * s / total));
    let psg = PsgFeatures {
        ahi: round1(ahi),
        ai: round1(ai),
        hi: round1(ahi - ai),
        n1,
        n2,
        n3,
        rem: round1(rem.min(100.0 - n1 - n2 - n3).max(0.0)),
        arousal: round1(rng.random_range(5.0..25.0) + 0.5 * ahi),
        se: round1(if copd {
            rng.random_range(65.0..90.0)
        } else {
            rng.random_range(75.0..95.0)
        }),
    };
    let demographics = Demographics {
        gender,
        age: age.round(),
        weight: round1(weight),
        height: round1(height),
        smoking,
    };
    (label, demographics, psg)
}

/// One synthetic patient with profile parameters jittered around the preset.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthPatient {
    pub profile: SynthProfile,
    pub recording: Recording,
    pub log: Vec<PlantedEvent>,
}

/// Full synthetic patient for a kind. Everything derives from `seed`.
pub fn synth_patient(patient_id: &str, kind: ProfileKind, seed: u64) -> Result<SynthPatient> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nominal = SynthProfile::preset(kind, seed);
    let jitter = |rng: &mut ChaCha8Rng, v: f64, rel: f64| v * (1.0 + rng.random_range(-rel..rel));
    let profile = SynthProfile {
        baseline: nominal.baseline + rng.random_range(-0.75..0.75),
        desat_rate: jitter(&mut rng, nominal.desat_rate, 0.3),
        desat_depth: nominal.desat_depth,
        desat_duration_s: nominal.desat_duration_s,
        sustained_hypoxemia_depth: jitter(&mut rng, nominal.sustained_hypoxemia_depth, 0.2),
        rem_cluster_fraction: jitter(&mut rng, nominal.rem_cluster_fraction, 0.5),
        noise_sd: jitter(&mut rng, nominal.noise_sd, 0.3),
        ..nominal
    };
    let duration_h = (rng.random_range(6.5..8.5) * 3600.0_f64).round() / 3600.0;
    let (label, demographics, psg) = draw_covariates(kind, &mut rng);
    let (samples, log) = generate_samples(&profile, duration_h)?;
    Ok(SynthPatient {
        profile,
        recording: Recording {
            patient_id: patient_id.to_string(),
            samples,
            fs: SYNTH_FS,
            label,
            demographics,
            psg: Some(psg),
        },
        log,
    })
}

/// Cohort composition, e.g. `healthy:0.4,osa_mild:0.15,copd_like:0.45`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub parts: Vec<(ProfileKind, f64)>,
}

impl FromStr for CohortSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| Error::InvalidInput(format!("cohort spec `{s}`: {m}"));
        let mut parts: Vec<(ProfileKind, f64)> = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (name, frac) = item
                .split_once(':')
                .ok_or_else(|| bad(format!("`{item}` is not profile:fraction")))?;
            let kind: ProfileKind = name.trim().parse().map_err(|e: Error| bad(e.to_string()))?;
            let frac: f64 = frac
                .trim()
                .parse()
                .map_err(|_| bad(format!("`{frac}` is not a number")))?;
            if !(frac.is_finite() && frac >= 0.0) {
                return Err(bad(format!("fraction {frac} must be >= 0")));
            }
            if parts.iter().any(|(k, _)| *k == kind) {
                return Err(bad(format!("`{kind}` listed twice")));
            }
            parts.push((kind, frac));
        }
        if parts.is_empty() {
            return Err(bad("no profiles".into()));
        }
        let total: f64 = parts.iter().map(|(_, f)| f).sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(bad(format!("fractions sum to {total}, not 1")));
        }
        Ok(CohortSpec { parts })
    }
}

impl CohortSpec {
    /// Patients per profile by largest remainder: each part gets
    /// `floor(n * f)`, then the leftover patients go to the largest
    /// fractional parts (earlier parts first on ties).
    pub fn counts(&self, n: usize) -> Vec<(ProfileKind, usize)> {
        let exact: Vec<f64> = self.parts.iter().map(|(_, f)| f * n as f64).collect();
        let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
        let assigned: usize = counts.iter().sum();
        let mut order: Vec<usize> = (0..exact.len()).collect();
        order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
        for &i in order.iter().take(n.saturating_sub(assigned)) {
            counts[i] += 1;
        }
        self.parts.iter().map(|(k, _)| *k).zip(counts).collect()
    }
}

/// Patients of a cohort, ids `P0001...` in profile order. Patient `i` is
/// seeded from `(seed, i)`.
pub fn cohort(spec: &CohortSpec, n: usize, seed: u64) -> Result<Vec<SynthPatient>> {
    let kinds: Vec<ProfileKind> = spec
        .counts(n)
        .into_iter()
        .flat_map(|(k, c)| std::iter::repeat_n(k, c))
        .collect();
    use rayon::prelude::*;
    kinds
        .par_iter()
        .enumerate()
        .map(|(i, &kind)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            synth_patient(&format!("P{:04}", i + 1), kind, rng.random())
        })
        .collect()
}

/// Writes `signals/<id>.txt`, `manifest.csv` and `plant_log.csv` under `dir`.
pub fn write_cohort(dir: &Path, patients: &[SynthPatient]) -> Result<()> {
    let sig_dir = dir.join("signals");
    fs::create_dir_all(&sig_dir).map_err(|e| Error::io(&sig_dir, e))?;
    let mut rows = Vec::with_capacity(patients.len());
    for p in patients {
        let rel = format!("signals/{}.txt", p.recording.patient_id);
        signal::write_signal(&dir.join(&rel), &p.recording.samples)?;
        rows.push((&p.recording, rel));
    }
    signal::write_manifest(&dir.join("manifest.csv"), &rows)?;
    let log_path = dir.join("plant_log.csv");
    let mut text = String::from("patient_id,start_s,end_s,kind\n");
    for p in patients {
        for e in &p.log {
            text.push_str(&format!(
                "{},{},{},{}\n",
                p.recording.patient_id, e.start_s, e.end_s, e.kind
            ));
        }
    }
    let mut f = fs::File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(&log_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn healthy_without_noise_is_flat() {
        let p = SynthProfile {
            noise_sd: 0.0,
            ..SynthProfile::preset(ProfileKind::Healthy, 1)
        };
        let (x, log) = generate_samples(&p, 1.0).unwrap();
        assert!(log.is_empty());
        assert!(x.iter().all(|&v| v == 96.0));
        assert_eq!(x.len(), 3600);
    }

    #[test]
    fn same_seed_same_trace() {
        let a = synth_patient("P1", ProfileKind::OvsLike, 7).unwrap();
        let b = synth_patient("P1", ProfileKind::OvsLike, 7).unwrap();
        assert_eq!(a, b);
        let c = synth_patient("P1", ProfileKind::OvsLike, 8).unwrap();
        assert_ne!(a.recording.samples, c.recording.samples);
        assert!(a.recording.samples.iter().all(|v| (50.0..=100.0).contains(v)));
    }

    #[test]
    fn desats_are_disjoint_and_spaced() {
        let p = SynthProfile::preset(ProfileKind::OsaSevere, 3);
        let log = plant_log(&p, 8.0);
        let d: Vec<_> = log.iter().filter(|e| e.kind == PlantKind::Desat).collect();
        assert!(d.windows(2).all(|w| w[1].start_s >= w[0].end_s + REFRACTORY_S));
        let rate = d.len() as f64 / 8.0;
        assert!((rate - 30.0).abs() < 5.0, "{rate}");
    }

    #[test]
    fn cohort_counts_by_largest_remainder() {
        let spec: CohortSpec = "healthy:0.4,osa_mild:0.15,osa_severe:0.15,copd_like:0.2,ovs_like:0.1"
            .parse()
            .unwrap();
        let c = spec.counts(10);
        assert_eq!(c.iter().map(|x| x.1).collect::<Vec<_>>(), vec![4, 2, 1, 2, 1]);
        let c = spec.counts(100);
        assert_eq!(c.iter().map(|x| x.1).collect::<Vec<_>>(), vec![40, 15, 15, 20, 10]);
        let thirds: CohortSpec = "healthy:0.3333333333,osa_mild:0.3333333333,copd_like:0.3333333334"
            .parse()
            .unwrap();
        assert_eq!(thirds.counts(10).iter().map(|x| x.1).collect::<Vec<_>>(), vec![3, 3, 4]);
        assert!("healthy:0.5".parse::<CohortSpec>().is_err());
        assert!("martian:1.0".parse::<CohortSpec>().is_err());
        assert!("healthy:0.5,healthy:0.5".parse::<CohortSpec>().is_err());
    }
}
