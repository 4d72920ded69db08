//! Approximate and sample entropy.
//!
//! Both estimators reduce to per-template match counts under the Chebyshev
//! distance. Counts for template length 1 and 2 use sorted-order range
//! queries (binary search, and an offline Fenwick sweep for the 2-D case), so
//! the cost is O(n log n) instead of the quadratic pairwise scan. Longer
//! templates fall back to a pruned pairwise scan.

use crate::error::{Error, Result};
use crate::math;
use crate::warnings::Warnings;

/// Number of templates `j < n_templates` within Chebyshev distance `r` of each
/// template `i < n_templates` (self-match included). Template `i` is
/// `x[i..i + dim]`.
pub fn match_counts(x: &[f64], dim: usize, r: f64, n_templates: usize) -> Vec<u64> {
    assert!(dim >= 1 && n_templates + dim - 1 <= x.len());
    match dim {
        1 => counts_1d(&x[..n_templates], r),
        2 => counts_2d(&x[..n_templates], &x[1..n_templates + 1], r),
        _ => counts_generic(x, dim, r, n_templates),
    }
}

/// Index range `[lo, hi)` of the values in `sorted` with `|v - c| <= r`.
///
/// Floating subtraction is monotone, so both predicates below are monotone
/// over sorted values and the range is exactly the set the direct
/// `(c - v).abs() <= r` test accepts.
fn value_range(sorted: &[f64], c: f64, r: f64) -> (usize, usize) {
    let lo = sorted.partition_point(|&v| c - v > r);
    let hi = sorted.partition_point(|&v| v - c <= r);
    (lo, hi.max(lo))
}

fn counts_1d(x: &[f64], r: f64) -> Vec<u64> {
    let sorted = math::sorted(x);
    x.iter()
        .map(|&c| {
            let (lo, hi) = value_range(&sorted, c, r);
            (hi - lo) as u64
        })
        .collect()
}

struct Fenwick(Vec<u64>);

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick(vec![0; n + 1])
    }

    fn add(&mut self, pos: usize) {
        let mut i = pos + 1;
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of inserted positions `< pos`.
    fn prefix(&self, pos: usize) -> u64 {
        let mut i = pos;
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

fn counts_2d(xs: &[f64], ys: &[f64], r: f64) -> Vec<u64> {
    let n = xs.len();
    let mut by_x: Vec<usize> = (0..n).collect();
    by_x.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut by_y: Vec<usize> = (0..n).collect();
    by_y.sort_by(|&a, &b| ys[a].total_cmp(&ys[b]));
    let sorted_x: Vec<f64> = by_x.iter().map(|&i| xs[i]).collect();
    let sorted_y: Vec<f64> = by_y.iter().map(|&i| ys[i]).collect();
    let mut y_rank = vec![0usize; n];
    for (rank, &i) in by_y.iter().enumerate() {
        y_rank[i] = rank;
    }

    // Query (i, sign) attached to a sweep position: count points whose
    // x-position is below it and whose y-rank lies in the query's y-range.
    let mut at: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n + 1];
    let mut y_ranges = Vec::with_capacity(n);
    for i in 0..n {
        let (xlo, xhi) = value_range(&sorted_x, xs[i], r);
        y_ranges.push(value_range(&sorted_y, ys[i], r));
        at[xhi].push((i, true));
        at[xlo].push((i, false));
    }
    let mut counts = vec![0i64; n];
    let mut tree = Fenwick::new(n);
    for pos in 0..=n {
        for &(i, plus) in &at[pos] {
            let (ylo, yhi) = y_ranges[i];
            let c = (tree.prefix(yhi) - tree.prefix(ylo)) as i64;
            counts[i] += if plus { c } else { -c };
        }
        if pos < n {
            tree.add(y_rank[by_x[pos]]);
        }
    }
    counts.into_iter().map(|c| c as u64).collect()
}

fn counts_generic(x: &[f64], dim: usize, r: f64, n_templates: usize) -> Vec<u64> {
    let firsts = &x[..n_templates];
    let mut order: Vec<usize> = (0..n_templates).collect();
    order.sort_by(|&a, &b| firsts[a].total_cmp(&firsts[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| firsts[i]).collect();
    (0..n_templates)
        .map(|i| {
            let (lo, hi) = value_range(&sorted, firsts[i], r);
            order[lo..hi]
                .iter()
                .filter(|&&j| (1..dim).all(|k| (x[i + k] - x[j + k]).abs() <= r))
                .count() as u64
        })
        .collect()
}

fn check_len(x: &[f64], m: usize) -> Result<()> {
    if m == 0 || x.len() < m + 2 {
        return Err(Error::SignalTooShort(format!(
            "entropy with m={m} needs at least {} samples, got {}",
            m + 2,
            x.len()
        )));
    }
    Ok(())
}

/// ApEn(m, r) = Φ_m − Φ_{m+1}, self-matches included.
pub fn approx_entropy_with_r(x: &[f64], m: usize, r: f64) -> Result<f64> {
    check_len(x, m)?;
    let n = x.len();
    let phi = |dim: usize| {
        let nt = n - dim + 1;
        let counts = match_counts(x, dim, r, nt);
        counts.iter().map(|&c| (c as f64 / nt as f64).ln()).sum::<f64>() / nt as f64
    };
    Ok(phi(m) - phi(m + 1))
}

/// ApEn with tolerance `r_factor` times the population SD; 0 for a constant signal.
pub fn approx_entropy(x: &[f64], m: usize, r_factor: f64) -> Result<f64> {
    check_len(x, m)?;
    let sd = math::pop_sd(x);
    if sd == 0.0 {
        return Ok(0.0);
    }
    approx_entropy_with_r(x, m, r_factor * sd)
}

/// Fallback used when no template pairs match: ln(n−m) + ln(n−m−1) − ln 2.
pub fn sampen_cap(n: usize, m: usize) -> f64 {
    ((n - m) as f64).ln() + ((n - m - 1) as f64).ln() - std::f64::consts::LN_2
}

/// SampEn(m, r) = −ln(A/B) over the first n−m templates, self-matches excluded.
pub fn sample_entropy_with_r(x: &[f64], m: usize, r: f64) -> Result<(f64, Warnings)> {
    check_len(x, m)?;
    let n = x.len();
    let nt = n - m;
    let pairs = |dim: usize| -> u64 { match_counts(x, dim, r, nt).iter().map(|c| c - 1).sum() };
    let b = pairs(m);
    let a = pairs(m + 1);
    if a == 0 || b == 0 {
        return Ok((sampen_cap(n, m), Warnings::SAMPEN_CAPPED));
    }
    Ok(((b as f64 / a as f64).ln(), Warnings::NONE))
}

/// SampEn with tolerance `r_factor` times the population SD; 0 for a constant signal.
pub fn sample_entropy(x: &[f64], m: usize, r_factor: f64) -> Result<(f64, Warnings)> {
    check_len(x, m)?;
    let sd = math::pop_sd(x);
    if sd == 0.0 {
        return Ok((0.0, Warnings::NONE));
    }
    sample_entropy_with_r(x, m, r_factor * sd)
}
