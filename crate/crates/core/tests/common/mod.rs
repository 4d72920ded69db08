//! Slow, direct reference implementations used as test oracles.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.random::<f64>()).collect()
}

pub fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    // Box-Muller keeps this oracle independent of the crate's sampling code.
    (0..n)
        .map(|_| {
            let u1: f64 = 1.0 - rng.random::<f64>();
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        })
        .collect()
}

pub fn pop_sd(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mu = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n).sqrt()
}

fn cheb(x: &[f64], i: usize, j: usize, m: usize) -> f64 {
    (0..m).map(|k| (x[i + k] - x[j + k]).abs()).fold(0.0, f64::max)
}

/// Pincus ApEn by the full pairwise scan.
pub fn naive_apen(x: &[f64], m: usize, r: f64) -> f64 {
    let n = x.len();
    let phi = |m: usize| {
        let nt = n - m + 1;
        let mut total = 0.0;
        for i in 0..nt {
            let c = (0..nt).filter(|&j| cheb(x, i, j, m) <= r).count();
            total += (c as f64 / nt as f64).ln();
        }
        total / nt as f64
    };
    phi(m) - phi(m + 1)
}

/// Richman-Moorman SampEn by the full pairwise scan; `None` when A or B is 0.
pub fn naive_sampen(x: &[f64], m: usize, r: f64) -> Option<f64> {
    let nt = x.len() - m;
    let (mut a, mut b) = (0u64, 0u64);
    for i in 0..nt {
        for j in 0..nt {
            if i == j {
                continue;
            }
            if cheb(x, i, j, m) <= r {
                b += 1;
                if cheb(x, i, j, m + 1) <= r {
                    a += 1;
                }
            }
        }
    }
    (a > 0 && b > 0).then(|| (b as f64 / a as f64).ln())
}

/// LZ76 phrase count straight from the definition: each phrase is the
/// shortest extension that is not a substring of everything before its last
/// symbol.
pub fn lz76_reference(s: &[u8]) -> usize {
    let n = s.len();
    let mut count = 0;
    let mut start = 0;
    while start < n {
        let mut len = 1;
        while start + len <= n {
            let phrase = &s[start..start + len];
            let history = &s[..start + len - 1];
            let seen = history.len() >= len && history.windows(len).any(|w| w == phrase);
            if !seen {
                break;
            }
            len += 1;
        }
        count += 1;
        start += len;
    }
    count
}

pub fn median_of(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Median over the centred window, truncated symmetrically at the edges.
pub fn brute_median_filter(x: &[f64], k: usize) -> Vec<f64> {
    let h = k / 2;
    let n = x.len();
    (0..n)
        .map(|i| {
            let r = h.min(i).min(n - 1 - i);
            median_of(x[i - r..=i + r].to_vec())
        })
        .collect()
}

pub fn brute_ctm(x: &[f64], rho: f64) -> f64 {
    let mut inside = 0;
    let total = x.len() - 2;
    for i in 0..total {
        let a = x[i + 1] - x[i];
        let b = x[i + 2] - x[i + 1];
        if (a * a + b * b).sqrt() < rho {
            inside += 1;
        }
    }
    inside as f64 / total as f64
}

pub fn brute_zc(x: &[f64], level: f64) -> usize {
    (1..x.len())
        .filter(|&i| (x[i - 1] - level) * (x[i] - level) < 0.0)
        .count()
}

pub fn brute_delta_index(x: &[f64], seg: usize) -> f64 {
    let k = x.len() / seg;
    let means: Vec<f64> = (0..k)
        .map(|j| x[j * seg..(j + 1) * seg].iter().sum::<f64>() / seg as f64)
        .collect();
    (1..k).map(|j| (means[j] - means[j - 1]).abs()).sum::<f64>() / (k - 1) as f64
}

pub fn brute_ct(x: &[f64], level: f64) -> f64 {
    let mut c = 0;
    for &v in x {
        if v < level {
            c += 1;
        }
    }
    100.0 * c as f64 / x.len() as f64
}

pub fn brute_ca(x: &[f64], level: f64) -> f64 {
    let mut s = 0.0;
    for &v in x {
        if v < level {
            s += level - v;
        }
    }
    s / x.len() as f64
}

/// Exact two-sided permutation p-value of the rank-sum statistic, enumerating
/// every assignment of `a.len()` pooled positions to the first group.
pub fn exact_rank_sum_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let n1 = a.len();
    let ranks: Vec<f64> = pooled
        .iter()
        .map(|&v| {
            let below = pooled.iter().filter(|&&w| w < v).count() as f64;
            let equal = pooled.iter().filter(|&&w| w == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let expected = n1 as f64 * (n as f64 + 1.0) / 2.0;
    let observed = (ranks[..n1].iter().sum::<f64>() - expected).abs();
    let (mut extreme, mut total) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        total += 1;
        if (s - expected).abs() >= observed - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

/// Plug-in MI in nats from a dense contingency table.
pub fn mi_from_codes(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut total = 0.0;
    let mut pairs: Vec<(usize, usize)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_unstable();
    pairs.dedup();
    for (x, y) in pairs {
        let nxy = a.iter().zip(b).filter(|&(&p, &q)| p == x && q == y).count() as f64;
        let nx = a.iter().filter(|&&p| p == x).count() as f64;
        let ny = b.iter().filter(|&&q| q == y).count() as f64;
        total += nxy / n * (nxy * n / (nx * ny)).ln();
    }
    total
}

/// Greedy mRMR recomputed from scratch at every step: the incremental score of
/// every remaining candidate is evaluated against the chosen set and the best
/// (first on ties) is taken.
pub fn exhaustive_mrmr(columns: &[Vec<usize>], labels: &[usize], k: usize) -> Vec<(usize, f64)> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..columns.len() {
            if chosen.contains(&j) {
                continue;
            }
            let rel = mi_from_codes(&columns[j], labels);
            let score = if chosen.is_empty() {
                rel
            } else {
                rel - chosen
                    .iter()
                    .map(|&s| mi_from_codes(&columns[j], &columns[s]))
                    .sum::<f64>()
                    / chosen.len() as f64
            };
            if best.is_none_or(|(_, b)| score > b + 1e-12) {
                best = Some((j, score));
            }
        }
        let b = best.unwrap();
        chosen.push(b.0);
        out.push(b);
    }
    out
}

/// Intervals `[start, end)` of consecutive samples strictly below `level`.
pub fn runs_below(x: &[f64], level: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &v) in x.iter().enumerate() {
        match (v < level, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, x.len()));
    }
    out
}

/// Four short 4 % dips inside one long sub-median excursion of a 96 % trace.
pub fn dips_in_excursion_trace() -> Vec<f64> {
    let mut x = vec![96.0; 1800];
    for v in &mut x[600..1200] {
        *v = 93.0;
    }
    for c in [700usize, 820, 940, 1060] {
        for (k, v) in x[c..c + 30].iter_mut().enumerate() {
            let t = k as f64 / 29.0;
            *v = 93.0 - 4.0 * (1.0 - (2.0 * t - 1.0).abs());
        }
    }
    x
}
