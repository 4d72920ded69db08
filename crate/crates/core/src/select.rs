//! Univariate screening by the rank-sum test, and mRMR feature selection on
//! histogram mutual information.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::math;
use crate::pipeline::FeatureMatrix;

/// Average (mid) ranks, 1-based.
pub fn mid_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided Mann-Whitney p-value by the normal approximation with tie and
/// continuity corrections.
pub fn rank_sum_test(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("rank-sum test needs two non-empty groups".into()));
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = mid_ranks(&pooled);
    let r1: f64 = ranks[..a.len()].iter().sum();
    let u = r1 - n1 * (n1 + 1.0) / 2.0;
    let mean = n1 * n2 / 2.0;

    let sorted = math::sorted(&pooled);
    let mut ties = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&v| v == sorted[i]).count();
        let t = j as f64;
        ties += t * t * t - t;
        i += j;
    }
    let var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    if !(var > 0.0) {
        return Ok(1.0);
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::standard();
    Ok((2.0 * normal.sf(z)).min(1.0))
}

/// Equal-frequency bin codes. A value's bin is set by its lowest rank, so ties
/// always share a bin.
pub fn equal_frequency_bins(x: &[f64], bins: usize) -> Vec<usize> {
    let n = x.len();
    let bins = bins.max(1);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut codes = vec![0; n];
    let mut first = 0;
    for (pos, &k) in idx.iter().enumerate() {
        if pos > 0 && x[k] != x[idx[pos - 1]] {
            first = pos;
        }
        codes[k] = first * bins / n;
    }
    codes
}

/// Plug-in mutual information (nats) of two code sequences.
pub fn mutual_information_codes(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "code sequences differ in length");
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let na = a.iter().max().map_or(0, |m| m + 1);
    let nb = b.iter().max().map_or(0, |m| m + 1);
    let mut joint = vec![0u32; na * nb];
    let mut pa = vec![0u32; na];
    let mut pb = vec![0u32; nb];
    for (&i, &j) in a.iter().zip(b) {
        joint[i * nb + j] += 1;
        pa[i] += 1;
        pb[j] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for i in 0..na {
        for j in 0..nb {
            let c = joint[i * nb + j];
            if c > 0 {
                let c = f64::from(c);
                mi += c / nf * (c * nf / (f64::from(pa[i]) * f64::from(pb[j]))).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Mutual information of two continuous variables after equal-frequency
/// binning of each.
pub fn mutual_information(x: &[f64], y: &[f64], bins: usize) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "mutual information needs two equal-length samples of size >= 2, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(mutual_information_codes(
        &equal_frequency_bins(x, bins),
        &equal_frequency_bins(y, bins),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MrmrResult {
    /// Selected column indices, in selection order.
    pub selected: Vec<usize>,
    pub names: Vec<String>,
    /// Greedy score of each step.
    pub phi: Vec<f64>,
    /// I(x, c) of each selected feature.
    pub relevance: Vec<f64>,
    /// I(x_i, x_j) between selected features (row and column in selection order).
    pub redundancy: Vec<Vec<f64>>,
}

const TIE_EPS: f64 = 1e-12;

/// Greedy mRMR over discretized columns and class codes. Step scores are
/// `I(x, c) - mean_{s in S} I(x, s)`; ties (within `TIE_EPS`) go to the
/// earlier column.
pub fn mrmr_codes(columns: &[Vec<usize>], names: &[String], labels: &[usize], k: usize) -> Result<MrmrResult> {
    let p = columns.len();
    if k == 0 || k > p {
        return Err(Error::InvalidInput(format!("cannot select {k} of {p} features")));
    }
    let relevance: Vec<f64> = columns.iter().map(|c| mutual_information_codes(c, labels)).collect();
    let mut redundancy_sum = vec![0.0; p];
    let mut chosen = vec![false; p];
    let mut selected = Vec::with_capacity(k);
    let mut phi = Vec::with_capacity(k);
    let mut pair_mi: Vec<Vec<f64>> = Vec::with_capacity(k);
    for step in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..p).filter(|&j| !chosen[j]) {
            let score = if step == 0 {
                relevance[j]
            } else {
                relevance[j] - redundancy_sum[j] / step as f64
            };
            if best.is_none_or(|(_, s)| score > s + TIE_EPS) {
                best = Some((j, score));
            }
        }
        let (j, score) = best.expect("a candidate remains while step < p");
        chosen[j] = true;
        selected.push(j);
        phi.push(score);
        let mi_with_j: Vec<f64> = (0..p)
            .map(|i| mutual_information_codes(&columns[i], &columns[j]))
            .collect();
        for i in 0..p {
            redundancy_sum[i] += mi_with_j[i];
        }
        pair_mi.push(selected.iter().map(|&s| mi_with_j[s]).collect());
    }
    let redundancy = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| if b <= a { pair_mi[a][b] } else { pair_mi[b][a] })
                .collect()
        })
        .collect();
    Ok(MrmrResult {
        names: selected.iter().map(|&j| names[j].clone()).collect(),
        relevance: selected.iter().map(|&j| relevance[j]).collect(),
        selected,
        phi,
        redundancy,
    })
}

/// Greedy mRMR selection of `k` columns of a feature matrix.
pub fn mrmr_select(matrix: &FeatureMatrix, k: usize, bins: usize) -> Result<MrmrResult> {
    let labels: Vec<usize> = matrix.labels().into_iter().map(usize::from).collect();
    let columns: Vec<Vec<usize>> = (0..matrix.columns.len())
        .map(|j| equal_frequency_bins(&matrix.column(j), bins))
        .collect();
    mrmr_codes(&columns, &matrix.columns, &labels, k)
}

/// Set objective: mean relevance minus mean pairwise redundancy over all
/// ordered pairs (including `i = j`).
pub fn set_objective(columns: &[Vec<usize>], labels: &[usize], subset: &[usize]) -> f64 {
    if subset.is_empty() {
        return 0.0;
    }
    let s = subset.len() as f64;
    let d: f64 = subset
        .iter()
        .map(|&i| mutual_information_codes(&columns[i], labels))
        .sum::<f64>()
        / s;
    let r: f64 = subset
        .iter()
        .flat_map(|&i| subset.iter().map(move |&j| (i, j)))
        .map(|(i, j)| mutual_information_codes(&columns[i], &columns[j]))
        .sum::<f64>()
        / (s * s);
    d - r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningRow {
    pub feature: String,
    pub p_value: f64,
    /// 1 = smallest p.
    pub rank: usize,
    pub median_non_copd: f64,
    pub iqr_non_copd: f64,
    pub median_copd: f64,
    pub iqr_copd: f64,
}

/// Rank-sum screening of every column with windows as the unit of analysis,
/// sorted by ascending p (ties by column order).
pub fn screen(matrix: &FeatureMatrix) -> Result<Vec<ScreeningRow>> {
    let labels = matrix.labels();
    if !labels.contains(&0) || !labels.contains(&1) {
        return Err(Error::InvalidInput("screening needs both classes in the table".into()));
    }
    let mut rows = (0..matrix.columns.len())
        .map(|j| {
            let col = matrix.column(j);
            let pos: Vec<f64> = col
                .iter()
                .zip(&labels)
                .filter(|(_, l)| **l == 1)
                .map(|(v, _)| *v)
                .collect();
            let neg: Vec<f64> = col
                .iter()
                .zip(&labels)
                .filter(|(_, l)| **l != 1)
                .map(|(v, _)| *v)
                .collect();
            Ok(ScreeningRow {
                feature: matrix.columns[j].clone(),
                p_value: rank_sum_test(&neg, &pos)?,
                rank: 0,
                median_non_copd: math::median(&neg),
                iqr_non_copd: math::iqr(&neg),
                median_copd: math::median(&pos),
                iqr_copd: math::iqr(&pos),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.p_value.total_cmp(&b.p_value));
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(rows)
}
