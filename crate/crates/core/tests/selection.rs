mod common;

use common::*;
use oxiscreen::pipeline::FeatureRow;
use oxiscreen::select::{
    equal_frequency_bins, mrmr_codes, mrmr_select, mutual_information, mutual_information_codes, rank_sum_test, screen,
};
use oxiscreen::{CopdLabel, FeatureMatrix, ModelKind};
use rand::Rng;

#[test]
fn rank_sum_agrees_with_exact_enumeration() {
    let mut r = rng(31);
    for trial in 0..40 {
        let shift = f64::from(trial % 4) * 0.3;
        let a: Vec<f64> = (0..5).map(|_| r.random::<f64>()).collect();
        let b: Vec<f64> = (0..5).map(|_| r.random::<f64>() + shift).collect();
        let approx = rank_sum_test(&a, &b).unwrap();
        let exact = exact_rank_sum_p(&a, &b);
        assert!(
            (approx - exact).abs() <= 0.02,
            "trial {trial}: {a:?} vs {b:?}: normal {approx} exact {exact}"
        );
    }
}

#[test]
fn rank_sum_extremes() {
    let a: Vec<f64> = (1..=20).map(f64::from).collect();
    let b: Vec<f64> = (21..=40).map(f64::from).collect();
    assert!(rank_sum_test(&a, &a).unwrap() >= 0.99);
    assert!(rank_sum_test(&a, &b).unwrap() < 1e-6);
}

#[test]
fn independent_coins_share_almost_no_information() {
    let mut r = rng(41);
    let x: Vec<usize> = (0..10_000).map(|_| r.random_range(0..2)).collect();
    let y: Vec<usize> = (0..10_000).map(|_| r.random_range(0..2)).collect();
    assert!(mutual_information_codes(&x, &y) <= 0.01);
    assert!((mutual_information_codes(&x, &x) - mi_from_codes(&x, &x)).abs() < 1e-12);
}

#[test]
fn mutual_information_matches_contingency_table() {
    let mut r = rng(42);
    for _ in 0..20 {
        let x: Vec<f64> = (0..200).map(|_| r.random::<f64>()).collect();
        let y: Vec<f64> = x.iter().map(|v| v + 0.3 * r.random::<f64>()).collect();
        let want = mi_from_codes(&equal_frequency_bins(&x, 10), &equal_frequency_bins(&y, 10));
        assert!((mutual_information(&x, &y, 10).unwrap() - want).abs() < 1e-12);
    }
}

/// An informative feature, a near-copy of it, and an independent feature
/// carrying a little information of its own.
fn redundant_copy_columns(n: usize) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut r = rng(51);
    let c: Vec<usize> = (0..n).map(|_| r.random_range(0..2)).collect();
    let f1: Vec<usize> = c
        .iter()
        .map(|&v| if r.random::<f64>() < 0.9 { v } else { 1 - v })
        .collect();
    let f2 = f1.clone();
    let f3: Vec<usize> = c
        .iter()
        .map(|&v| if r.random::<f64>() < 0.6 { v } else { 1 - v })
        .collect();
    (vec![f1, f2, f3], c)
}

#[test]
fn redundancy_suppresses_the_copy() {
    let (cols, c) = redundant_copy_columns(2000);
    let names = ["f1", "f2", "f3"].map(String::from);
    let res = mrmr_codes(&cols, &names, &c, 2).unwrap();
    assert_eq!(res.names, ["f1", "f3"]);
    let oracle = exhaustive_mrmr(&cols, &c, 2);
    assert_eq!(res.selected, oracle.iter().map(|o| o.0).collect::<Vec<_>>());
    let all = mrmr_codes(&cols, &names, &c, 3).unwrap();
    assert_eq!(all.names, ["f1", "f3", "f2"]);
    assert!(mrmr_codes(&cols, &names, &c, 0).is_err());
}

fn matrix_with(columns: Vec<(&str, Vec<f64>)>, labels: &[u8]) -> FeatureMatrix {
    FeatureMatrix {
        kind: ModelKind::Model2,
        columns: columns.iter().map(|c| c.0.to_string()).collect(),
        rows: labels
            .iter()
            .enumerate()
            .map(|(i, &l)| FeatureRow {
                patient_id: format!("P{i}"),
                window_index: 0,
                start_s: 0.0,
                label: if l == 1 {
                    CopdLabel::copd(None)
                } else {
                    CopdLabel::non_copd()
                },
                values: columns.iter().map(|c| c.1[i]).collect(),
            })
            .collect(),
    }
}

#[test]
fn screening_ranks_the_planted_feature_first() {
    let mut r = rng(61);
    let labels: Vec<u8> = (0..120).map(|i| u8::from(i % 3 == 0)).collect();
    let noise: Vec<f64> = (0..120).map(|_| r.random()).collect();
    let planted: Vec<f64> = labels.iter().map(|&l| f64::from(l) + 0.5 * r.random::<f64>()).collect();
    let m = matrix_with(
        vec![("noise", noise), ("constant", vec![95.0; 120]), ("planted", planted)],
        &labels,
    );
    let rows = screen(&m).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].feature, "planted");
    let constant = rows.iter().find(|r| r.feature == "constant").unwrap();
    assert!(constant.p_value >= 0.99);
    let mut ranks: Vec<usize> = rows.iter().map(|r| r.rank).collect();
    ranks.sort_unstable();
    assert_eq!(ranks, [1, 2, 3]);
    let sel = mrmr_select(&m, 1, 10).unwrap();
    assert_eq!(sel.names, ["planted"]);
    assert!(screen(&m.filter_rows(|r| r.label.class() == 1)).is_err());
}
