//! Classification metrics: ROC, AUROC and confusion-matrix rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::select::mid_ranks;
use crate::signal::{CopdLabel, Gold};

/// Area under the ROC curve as the Mann-Whitney statistic (tied scores count
/// one half).
pub fn auroc(y_true: &[u8], scores: &[f64]) -> Result<f64> {
    check_lengths(y_true.len(), scores.len())?;
    let n_pos = y_true.iter().filter(|&&y| y == 1).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric("AUROC needs both classes".into()));
    }
    let ranks = mid_ranks(scores);
    let r_pos: f64 = ranks.iter().zip(y_true).filter(|(_, &y)| y == 1).map(|(r, _)| r).sum();
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((r_pos - p * (p + 1.0) / 2.0) / (p * n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores `>= threshold` are called positive.
    pub threshold: f64,
}

/// ROC points over every distinct score, from (0, 0) at `+inf` to (1, 1).
pub fn roc_curve(y_true: &[u8], scores: &[f64]) -> Result<Vec<RocPoint>> {
    check_lengths(y_true.len(), scores.len())?;
    let n_pos = y_true.iter().filter(|&&y| y == 1).count() as f64;
    let n_neg = y_true.len() as f64 - n_pos;
    if n_pos == 0.0 || n_neg == 0.0 {
        return Err(Error::UndefinedMetric("ROC needs both classes".into()));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut i = 0;
    while i < idx.len() {
        let t = scores[idx[i]];
        while i < idx.len() && scores[idx[i]] == t {
            if y_true[idx[i]] == 1 {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp / n_neg,
            tpr: tp / n_pos,
            threshold: t,
        });
    }
    Ok(points)
}

/// Trapezoidal area under ROC points.
pub fn trapezoid_area(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl Confusion {
    pub fn from_predictions(y_true: &[u8], y_pred: &[u8]) -> Result<Confusion> {
        check_lengths(y_true.len(), y_pred.len())?;
        let mut c = Confusion::default();
        for (&t, &p) in y_true.iter().zip(y_pred) {
            match (t == 1, p == 1) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Sensitivity (0 when there are no positives).
    pub fn se(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn sp(&self) -> f64 {
        ratio(self.tn, self.tn + self.fp)
    }

    pub fn ppv(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn npv(&self) -> f64 {
        ratio(self.tn, self.tn + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_)
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    /// Cohen's kappa; 0 when chance agreement is total.
    pub fn kappa(&self) -> f64 {
        let n = self.total() as f64;
        if n == 0.0 {
            return 0.0;
        }
        let po = (self.tp + self.tn) as f64 / n;
        let pred_pos = (self.tp + self.fp) as f64 / n;
        let true_pos = (self.tp + self.fn_) as f64 / n;
        let pe = pred_pos * true_pos + (1.0 - pred_pos) * (1.0 - true_pos);
        if pe >= 1.0 {
            0.0
        } else {
            (po - pe) / (1.0 - pe)
        }
    }
}

/// Sensitivity within each GOLD grade (`None` for grades with no patient).
pub fn se_by_gold(labels: &[CopdLabel], y_pred: &[u8]) -> Result<[Option<f64>; 4]> {
    check_lengths(labels.len(), y_pred.len())?;
    let mut out = [None; 4];
    for (slot, g) in out.iter_mut().zip(Gold::ALL) {
        let (mut hit, mut total) = (0u64, 0u64);
        for (l, &p) in labels.iter().zip(y_pred) {
            if l.gold() == Some(g) {
                total += 1;
                hit += u64::from(p == 1);
            }
        }
        if total > 0 {
            *slot = Some(ratio(hit, total));
        }
    }
    Ok(out)
}

/// Metrics of one evaluated population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub auroc: f64,
    pub f1: f64,
    pub kappa: f64,
    pub se: f64,
    pub sp: f64,
    pub ppv: f64,
    pub npv: f64,
    pub se_gold: [Option<f64>; 4],
    pub confusion: Confusion,
}

impl Metrics {
    pub const NAMES: [&'static str; 7] = ["auroc", "f1", "kappa", "se", "sp", "ppv", "npv"];

    pub fn compute(labels: &[CopdLabel], scores: &[f64], y_pred: &[u8]) -> Result<Metrics> {
        let y: Vec<u8> = labels.iter().map(CopdLabel::class).collect();
        let confusion = Confusion::from_predictions(&y, y_pred)?;
        Ok(Metrics {
            auroc: auroc(&y, scores)?,
            f1: confusion.f1(),
            kappa: confusion.kappa(),
            se: confusion.se(),
            sp: confusion.sp(),
            ppv: confusion.ppv(),
            npv: confusion.npv(),
            se_gold: se_by_gold(labels, y_pred)?,
            confusion,
        })
    }

    /// Named scalar values, including `se_gold{g}` for grades present.
    pub fn named(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = Self::NAMES
            .iter()
            .zip([self.auroc, self.f1, self.kappa, self.se, self.sp, self.ppv, self.npv])
            .map(|(n, v)| (n.to_string(), v))
            .collect();
        for (g, v) in Gold::ALL.iter().zip(self.se_gold) {
            if let Some(v) = v {
                out.push((format!("se_gold{}", g.number()), v));
            }
        }
        out
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {a} labels vs {b} predictions"
        )));
    }
    Ok(())
}
