//! CART decision trees (Gini impurity) and bagged random forests.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    Sqrt,
}

impl MaxFeatures {
    pub fn count(self, p: usize) -> usize {
        match self {
            MaxFeatures::All => p,
            MaxFeatures::Sqrt => ((p as f64).sqrt().floor() as usize).clamp(1, p.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeParams {
    pub max_features: MaxFeatures,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_features: MaxFeatures::All,
            max_depth: usize::MAX,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfHyper {
    pub n_estimators: usize,
    pub max_features: MaxFeatures,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for RfHyper {
    fn default() -> Self {
        RfHyper {
            n_estimators: 100,
            max_features: MaxFeatures::Sqrt,
            max_depth: 10,
            min_samples_split: 2,
            min_samples_leaf: 1,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl RfHyper {
    fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_features: self.max_features,
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            min_samples_leaf: self.min_samples_leaf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// Share of COPD samples reaching the leaf.
    Leaf { p: f64 },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    /// Weighted impurity decrease per feature (unnormalized).
    pub importance: Vec<f64>,
}

fn gini(pos: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let p = pos / n;
    2.0 * p * (1.0 - p)
}

struct Best {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl DecisionTree {
    /// Grows a tree on the rows listed in `sample` (duplicates allowed).
    pub fn fit_on<R: Rng>(
        x: &[Vec<f64>],
        y: &[u8],
        sample: Vec<usize>,
        params: &TreeParams,
        rng: &mut R,
    ) -> DecisionTree {
        let p = x.first().map_or(0, Vec::len);
        let mtry = params.max_features.count(p);
        let n_root = sample.len() as f64;
        let mut tree = DecisionTree {
            nodes: Vec::new(),
            importance: vec![0.0; p],
        };
        let mut pairs: Vec<(f64, u8)> = Vec::with_capacity(sample.len());
        // (node slot, rows, depth)
        let mut stack = vec![(0usize, sample, 0usize)];
        tree.nodes.push(Node::Leaf { p: 0.0 });
        while let Some((slot, rows, depth)) = stack.pop() {
            let n = rows.len() as f64;
            let pos = rows.iter().filter(|&&i| y[i] == 1).count() as f64;
            let leaf = Node::Leaf {
                p: if n > 0.0 { pos / n } else { 0.0 },
            };
            let parent = gini(pos, n);
            if depth >= params.max_depth || rows.len() < params.min_samples_split || parent == 0.0 {
                tree.nodes[slot] = leaf;
                continue;
            }
            let features: Vec<usize> = if mtry == p {
                (0..p).collect()
            } else {
                index::sample(rng, p, mtry).into_vec()
            };
            let mut best: Option<Best> = None;
            for &f in &features {
                pairs.clear();
                pairs.extend(rows.iter().map(|&i| (x[i][f], y[i])));
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut left_pos = 0.0;
                for k in 1..pairs.len() {
                    left_pos += f64::from(pairs[k - 1].1);
                    if pairs[k].0 == pairs[k - 1].0 {
                        continue;
                    }
                    let nl = k as f64;
                    if k < params.min_samples_leaf || rows.len() - k < params.min_samples_leaf {
                        continue;
                    }
                    let nr = n - nl;
                    let child = (nl * gini(left_pos, nl) + nr * gini(pos - left_pos, nr)) / n;
                    let gain = parent - child;
                    if gain > 1e-15 && best.as_ref().is_none_or(|b| gain > b.gain) {
                        let (a, b) = (pairs[k - 1].0, pairs[k].0);
                        let mid = a + (b - a) / 2.0;
                        best = Some(Best {
                            feature: f,
                            threshold: if mid < b { mid } else { a },
                            gain,
                        });
                    }
                }
            }
            let Some(best) = best else {
                tree.nodes[slot] = leaf;
                continue;
            };
            tree.importance[best.feature] += n / n_root * best.gain;
            let (l_rows, r_rows): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&i| x[i][best.feature] <= best.threshold);
            let left = tree.nodes.len();
            let right = left + 1;
            tree.nodes.push(Node::Leaf { p: 0.0 });
            tree.nodes.push(Node::Leaf { p: 0.0 });
            tree.nodes[slot] = Node::Split {
                feature: best.feature,
                threshold: best.threshold,
                left,
                right,
            };
            stack.push((right, r_rows, depth + 1));
            stack.push((left, l_rows, depth + 1));
        }
        tree
    }

    pub fn fit<R: Rng>(x: &[Vec<f64>], y: &[u8], params: &TreeParams, rng: &mut R) -> DecisionTree {
        DecisionTree::fit_on(x, y, (0..x.len()).collect(), params, rng)
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { p } => return p,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub hyper: RfHyper,
    pub trees: Vec<DecisionTree>,
    pub n_features: usize,
}

impl RandomForest {
    /// Each tree draws from its own ChaCha8 stream `(seed, tree index)`, so
    /// the forest does not depend on how trees are scheduled.
    pub fn fit(x: &[Vec<f64>], y: &[u8], hyper: &RfHyper) -> Result<RandomForest> {
        if x.is_empty() {
            return Err(Error::Training("random forest needs at least one row".into()));
        }
        if x.len() != y.len() {
            return Err(Error::Training(format!("{} rows but {} labels", x.len(), y.len())));
        }
        if hyper.n_estimators == 0 {
            return Err(Error::Training("random forest needs at least one tree".into()));
        }
        let params = hyper.tree_params();
        let n = x.len();
        let trees = (0..hyper.n_estimators)
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
                rng.set_stream(t as u64);
                let sample: Vec<usize> = if hyper.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit_on(x, y, sample, &params, &mut rng)
            })
            .collect();
        Ok(RandomForest {
            hyper: *hyper,
            trees,
            n_features: x[0].len(),
        })
    }

    /// Mean of the per-tree leaf COPD shares.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_proba(row)).sum::<f64>() / self.trees.len() as f64
    }

    /// Mean impurity decrease per feature: normalized within each tree,
    /// averaged over trees and renormalized to sum to 1.
    pub fn feature_importance(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_features];
        for t in &self.trees {
            let total: f64 = t.importance.iter().sum();
            if total > 0.0 {
                for (a, v) in acc.iter_mut().zip(&t.importance) {
                    *a += v / total;
                }
            }
        }
        let total: f64 = acc.iter().sum();
        if total > 0.0 {
            acc.iter_mut().for_each(|a| *a /= total);
        }
        acc
    }
}

/// Feature names with importances, in descending order (ties by name order).
pub fn ranked_importance(names: &[String], importance: &[f64]) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = names.iter().cloned().zip(importance.iter().copied()).collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    out
}
