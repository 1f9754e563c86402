//! CART trees with Gini impurity, bagged into a random forest.
//!
//! Tree `t` draws its bootstrap sample and per-node feature subsets from a
//! ChaCha8 stream seeded with `rng_seed + t`, so trees can be grown in any
//! order (or in parallel) with identical results.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_two_classes, ClassifierConfig, ClassifyError, Result};

/// `1 − p0² − p1²`; 0 for an empty node.
pub fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        counts: [usize; 2],
    },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
}

impl DecisionTree {
    pub fn leaf_counts(&self, x: &[f64]) -> [usize; 2] {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { counts } => return *counts,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    /// Leaf majority vote; ties go to class 0.
    pub fn predict(&self, x: &[f64]) -> u8 {
        let c = self.leaf_counts(x);
        u8::from(c[1] > c[0])
    }

    pub fn depth(&self) -> usize {
        fn depth(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + depth(left).max(depth(right)),
            }
        }
        depth(&self.root)
    }

    /// Grows a tree on the rows listed in `samples` (repeats allowed).
    pub fn grow(
        x: &DMatrix<f64>,
        y: &[u8],
        samples: &[usize],
        params: &TreeParams,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        DecisionTree {
            root: grow_node(x, y, samples, params, 0, rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub features_per_split: usize,
}

fn class_counts(y: &[u8], samples: &[usize]) -> [usize; 2] {
    let ones = samples.iter().filter(|&&i| y[i] == 1).count();
    [samples.len() - ones, ones]
}

struct Candidate {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

/// Lowest weighted Gini split of `samples` over `features` (ascending).
/// Equal impurities keep the earlier (lower feature, lower threshold) split.
fn best_split(x: &DMatrix<f64>, y: &[u8], samples: &[usize], features: &[usize]) -> Option<Candidate> {
    let n = samples.len() as f64;
    let total = class_counts(y, samples);
    let mut best: Option<Candidate> = None;
    let mut column: Vec<(f64, u8)> = Vec::with_capacity(samples.len());
    for &f in features {
        column.clear();
        column.extend(samples.iter().map(|&i| (x[(i, f)], y[i])));
        column.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = [0usize; 2];
        for k in 0..column.len() - 1 {
            left[column[k].1 as usize] += 1;
            let (lo, hi) = (column[k].0, column[k + 1].0);
            if lo == hi {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let nl = (k + 1) as f64;
            let impurity = (nl * gini(left) + (n - nl) * gini(right)) / n;
            if best.as_ref().is_none_or(|b| impurity < b.impurity - 1e-12) {
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some(Candidate {
                    feature: f,
                    threshold,
                    impurity,
                });
            }
        }
    }
    best
}

fn grow_node(
    x: &DMatrix<f64>,
    y: &[u8],
    samples: &[usize],
    params: &TreeParams,
    depth: usize,
    rng: &mut ChaCha8Rng,
) -> TreeNode {
    let counts = class_counts(y, samples);
    let pure = counts[0] == 0 || counts[1] == 0;
    let depth_reached = params.max_depth.is_some_and(|d| depth >= d);
    if pure || depth_reached || samples.len() < 2 {
        return TreeNode::Leaf { counts };
    }
    let p = x.ncols();
    let mut features = index::sample(rng, p, params.features_per_split.min(p)).into_vec();
    features.sort_unstable();
    let Some(split) = best_split(x, y, samples, &features) else {
        return TreeNode::Leaf { counts };
    };
    let (left, right): (Vec<usize>, Vec<usize>) = samples
        .iter()
        .partition(|&&i| x[(i, split.feature)] <= split.threshold);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow_node(x, y, &left, params, depth + 1, rng)),
        right: Box::new(grow_node(x, y, &right, params, depth + 1, rng)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub n_features: usize,
    pub trees: Vec<DecisionTree>,
}

impl Forest {
    /// Fraction of trees voting class 1.
    pub fn score(&self, x: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| t.predict(x) == 1).count();
        votes as f64 / self.trees.len() as f64
    }
}

pub(crate) fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(tree as u64))
}

pub(crate) fn train(x: &DMatrix<f64>, y: &[u8], cfg: &ClassifierConfig) -> Result<Forest> {
    cfg.validate()?;
    if x.nrows() != y.len() {
        return Err(ClassifyError::LengthMismatch(x.nrows(), y.len()));
    }
    check_two_classes(y)?;
    let n = x.nrows();
    let params = TreeParams {
        max_depth: cfg.max_depth,
        features_per_split: cfg.features_per_split.resolve(x.ncols()),
    };
    let trees = (0..cfg.trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(cfg.rng_seed, t);
            let bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            DecisionTree::grow(x, y, &bootstrap, &params, &mut rng)
        })
        .collect();
    Ok(Forest {
        n_features: x.ncols(),
        trees,
    })
}
