//! L2-regularized logistic regression by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LrHyper {
    pub learning_rate: f64,
    pub l2: f64,
    pub max_epochs: usize,
    /// Stop once the loss improves by less than this.
    pub tolerance: f64,
}

impl Default for LrHyper {
    fn default() -> Self {
        LrHyper {
            learning_rate: 0.1,
            l2: 1e-3,
            max_epochs: 300,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Loss after each epoch (index 0 is the initial loss).
    #[serde(skip)]
    pub loss_history: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean logistic loss plus `(l2 / 2) |w|^2`, and its gradient with respect to
/// `(w, b)` (bias last, unregularized).
pub fn loss_and_grad(x: &[Vec<f64>], y: &[u8], w: &[f64], b: f64, l2: f64) -> (f64, Vec<f64>) {
    let n = x.len() as f64;
    let mut grad = vec![0.0; w.len() + 1];
    let mut loss = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let z = b + row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
        let t = f64::from(label);
        loss += softplus(z) - t * z;
        let r = sigmoid(z) - t;
        for (g, a) in grad.iter_mut().zip(row) {
            *g += r * a;
        }
        grad[w.len()] += r;
    }
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    for (g, wi) in grad.iter_mut().zip(w) {
        *g += l2 * wi;
    }
    loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    (loss, grad)
}

impl LogisticModel {
    pub fn fit(x: &[Vec<f64>], y: &[u8], hyper: &LrHyper) -> Result<LogisticModel> {
        if !(hyper.learning_rate > 0.0) {
            return Err(Error::Training(format!(
                "learning rate must be > 0, got {}",
                hyper.learning_rate
            )));
        }
        if !y.contains(&0) || !y.contains(&1) {
            return Err(Error::Training("logistic regression needs both classes".into()));
        }
        let p = x.first().map_or(0, Vec::len);
        let mut w = vec![0.0; p];
        let mut b = 0.0;
        let (mut loss, mut grad) = loss_and_grad(x, y, &w, b, hyper.l2);
        let mut history = vec![loss];
        for _ in 0..hyper.max_epochs {
            for (wi, g) in w.iter_mut().zip(&grad) {
                *wi -= hyper.learning_rate * g;
            }
            b -= hyper.learning_rate * grad[p];
            let (next, next_grad) = loss_and_grad(x, y, &w, b, hyper.l2);
            if !next.is_finite() {
                return Err(Error::Training(format!(
                    "loss diverged with learning_rate={} l2={}",
                    hyper.learning_rate, hyper.l2
                )));
            }
            history.push(next);
            let improvement = loss - next;
            loss = next;
            grad = next_grad;
            if improvement.abs() < hyper.tolerance {
                break;
            }
        }
        Ok(LogisticModel {
            weights: w,
            bias: b,
            loss_history: history,
        })
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.bias + row.iter().zip(&self.weights).map(|(a, c)| a * c).sum::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x: Vec<Vec<f64>> = (0..15)
                .map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let y: Vec<u8> = (0..15).map(|_| rng.random_range(0..2)).collect();
            let w: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b = rng.random_range(-1.0..1.0);
            let (_, g) = loss_and_grad(&x, &y, &w, b, 0.3);
            let h = 1e-6;
            for k in 0..4 {
                let shift = |d: f64| {
                    let mut w2 = w.clone();
                    let mut b2 = b;
                    if k < 3 {
                        w2[k] += d;
                    } else {
                        b2 += d;
                    }
                    loss_and_grad(&x, &y, &w2, b2, 0.3).0
                };
                let fd = (shift(h) - shift(-h)) / (2.0 * h);
                assert!((fd - g[k]).abs() <= 1e-6 * g[k].abs().max(1e-3), "{fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn one_class_is_rejected() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(LogisticModel::fit(&x, &[1, 1], &LrHyper::default()).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![f64::from(i) * 1e150]).collect();
        let y: Vec<u8> = (0..10).map(|i| u8::from(i >= 5)).collect();
        let hyper = LrHyper {
            learning_rate: 1e10,
            ..Default::default()
        };
        let err = LogisticModel::fit(&x, &y, &hyper).unwrap_err().to_string();
        assert!(err.contains("learning_rate=10000000000"), "{err}");
    }

    #[test]
    fn small_steps_never_increase_the_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let y: Vec<u8> = x.iter().map(|r| u8::from(r[0] + 0.3 * r[1] > 0.0)).collect();
        let hyper = LrHyper {
            learning_rate: 1e-6,
            l2: 0.0,
            max_epochs: 200,
            tolerance: 0.0,
        };
        let m = LogisticModel::fit(&x, &y, &hyper).unwrap();
        assert!(m.loss_history.windows(2).all(|w| w[1] <= w[0]));
    }
}
