//! Extremely randomized trees with the Gini criterion.
//!
//! Each node draws one uniform-random threshold per candidate feature
//! (instead of optimizing it) and keeps the candidate with the largest Gini
//! impurity decrease. There is no bootstrap: every tree sees the full
//! sample. Split gains are recorded at fit time so feature importances can
//! be derived from the model alone.
//!
//! Candidate features are evaluated against the sparse matrix directly,
//! treating absent entries as zeros; bag-of-words matrices are far too wide
//! to densify.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Deadline;
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Candidate features per split: a fixed fraction or sqrt(n_features).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MaxFeatures {
    Sqrt,
    Fraction(f64),
}

/// Forest fitting parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: MaxFeatures::Sqrt,
            min_samples_split: 2,
            max_depth: None,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if let MaxFeatures::Fraction(f) = self.max_features {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Config(format!(
                    "max_features fraction must be in (0, 1], got {f}"
                )));
            }
        }
        if self.min_samples_split < 2 {
            return Err(Error::Config("min_samples_split must be at least 2".into()));
        }
        Ok(())
    }

    fn candidates(&self, n_features: usize) -> usize {
        let m = match self.max_features {
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::Fraction(f) => (f * n_features as f64).floor() as usize,
        };
        m.clamp(1, n_features.max(1))
    }
}

/// One node of a flattened binary tree; the root is node 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        /// Sample-weighted Gini decrease of this split (for importances).
        gain: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: Vec<u64>,
    },
}

/// A single extra tree stored as a node arena.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    /// Leaf class counts reached by row `i` of `x`.
    fn leaf_counts<'m>(&'m self, x: &SparseMatrix, i: usize) -> &'m [u64] {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if x.get(i, *feature) < *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                TreeNode::Leaf { counts } => return counts,
            }
        }
    }
}

/// A fitted forest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtraTreesModel {
    pub trees: Vec<Tree>,
    pub n_features: usize,
    pub n_classes: usize,
    pub params: ForestParams,
}

/// Gini impurity `1 - sum(p_k^2)` of a class-count vector.
pub fn gini_impurity(class_counts: &[u64]) -> Result<f64> {
    let total: u64 = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::Domain(
            "gini impurity needs at least one positive count".into(),
        ));
    }
    Ok(gini_of(class_counts, total))
}

fn gini_of(counts: &[u64], total: u64) -> f64 {
    let t = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / t;
            p * p
        })
        .sum::<f64>()
}

struct TreeBuilder<'a> {
    x: &'a SparseMatrix,
    y: &'a [usize],
    n_classes: usize,
    n_total: usize,
    params: &'a ForestParams,
    rng: ChaCha8Rng,
    /// Permutation buffer for sampling candidate features without replacement.
    feature_pool: Vec<usize>,
}

struct Pending {
    rows: Vec<usize>,
    depth: usize,
    slot: usize,
}

impl<'a> TreeBuilder<'a> {
    fn build(mut self, deadline: Deadline) -> Result<Tree> {
        let mut nodes = Vec::new();
        nodes.push(TreeNode::Leaf { counts: Vec::new() }); // placeholder root
        let mut stack = vec![Pending {
            rows: (0..self.x.n_rows()).collect(),
            depth: 0,
            slot: 0,
        }];
        // Explicit DFS: right child pushed first so the left subtree is
        // built next, mirroring preorder recursion for a stable RNG order.
        while let Some(task) = stack.pop() {
            deadline.check()?;
            let hist = self.histogram(&task.rows);
            match self.try_split(&task, &hist) {
                Some((feature, threshold, gain, left_rows, right_rows)) => {
                    let left = nodes.len();
                    nodes.push(TreeNode::Leaf { counts: Vec::new() });
                    let right = nodes.len();
                    nodes.push(TreeNode::Leaf { counts: Vec::new() });
                    nodes[task.slot] = TreeNode::Split {
                        feature,
                        threshold,
                        gain,
                        left,
                        right,
                    };
                    stack.push(Pending {
                        rows: right_rows,
                        depth: task.depth + 1,
                        slot: right,
                    });
                    stack.push(Pending {
                        rows: left_rows,
                        depth: task.depth + 1,
                        slot: left,
                    });
                }
                None => {
                    nodes[task.slot] = TreeNode::Leaf { counts: hist };
                }
            }
        }
        Ok(Tree { nodes })
    }

    fn histogram(&self, rows: &[usize]) -> Vec<u64> {
        let mut hist = vec![0u64; self.n_classes];
        for &r in rows {
            hist[self.y[r]] += 1;
        }
        hist
    }

    /// Pick the best of `max_features` random-threshold candidates, or
    /// `None` if the node should become a leaf.
    #[allow(clippy::type_complexity)]
    fn try_split(
        &mut self,
        task: &Pending,
        hist: &[u64],
    ) -> Option<(usize, f64, f64, Vec<usize>, Vec<usize>)> {
        let n = task.rows.len();
        if n < self.params.min_samples_split {
            return None;
        }
        if hist.iter().filter(|&&c| c > 0).count() <= 1 {
            return None; // pure
        }
        if let Some(cap) = self.params.max_depth {
            if task.depth >= cap {
                return None;
            }
        }
        let n_features = self.x.n_cols();
        if n_features == 0 {
            return None;
        }
        let m = self.params.candidates(n_features);
        let parent_gini = gini_of(hist, n as u64);
        let mut values = vec![0.0f64; n];
        let mut best: Option<(usize, f64, f64)> = None;
        for pick in 0..m {
            // Partial Fisher-Yates: position `pick` gets a fresh candidate.
            let swap_with = self.rng.gen_range(pick..n_features);
            self.feature_pool.swap(pick, swap_with);
            let feature = self.feature_pool[pick];

            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for (slot, &r) in task.rows.iter().enumerate() {
                let v = self.x.get(r, feature);
                values[slot] = v;
                min = min.min(v);
                max = max.max(v);
            }
            if min == max {
                continue; // constant feature in this node
            }
            let u = 1.0 - self.rng.gen::<f64>(); // (0, 1]
            let threshold = min + u * (max - min);
            let mut left_hist = vec![0u64; self.n_classes];
            let mut n_left = 0u64;
            for (slot, &r) in task.rows.iter().enumerate() {
                if values[slot] < threshold {
                    left_hist[self.y[r]] += 1;
                    n_left += 1;
                }
            }
            let n_right = n as u64 - n_left;
            debug_assert!(n_left > 0 && n_right > 0);
            let right_hist: Vec<u64> = hist
                .iter()
                .zip(&left_hist)
                .map(|(&a, &l)| a - l)
                .collect();
            let weighted = (n_left as f64 * gini_of(&left_hist, n_left)
                + n_right as f64 * gini_of(&right_hist, n_right))
                / n as f64;
            let decrease = parent_gini - weighted;
            if best.is_none_or(|(_, _, d)| decrease > d) {
                best = Some((feature, threshold, decrease));
            }
        }
        let (feature, threshold, decrease) = best?;
        let mut left_rows = Vec::new();
        let mut right_rows = Vec::new();
        for &r in &task.rows {
            if self.x.get(r, feature) < threshold {
                left_rows.push(r);
            } else {
                right_rows.push(r);
            }
        }
        let gain = decrease * n as f64 / self.n_total as f64;
        Some((feature, threshold, gain, left_rows, right_rows))
    }
}

/// Fit an extremely randomized forest.
///
/// Trees are fitted in parallel; tree `t` owns the ChaCha8 stream seeded
/// with `params.seed ^ t`, so the result does not depend on scheduling.
pub fn fit_extra_trees(
    x: &SparseMatrix,
    y: &[usize],
    params: &ForestParams,
    deadline: Deadline,
) -> Result<ExtraTreesModel> {
    params.validate()?;
    if x.n_rows() != y.len() {
        return Err(Error::Shape(format!(
            "{} rows but {} labels",
            x.n_rows(),
            y.len()
        )));
    }
    if x.n_rows() == 0 {
        return Err(Error::Data("cannot fit a forest on an empty matrix".into()));
    }
    let n_classes = y.iter().max().unwrap() + 1;
    let trees: Vec<Tree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let builder = TreeBuilder {
                x,
                y,
                n_classes,
                n_total: x.n_rows(),
                params,
                rng: ChaCha8Rng::seed_from_u64(params.seed ^ t as u64),
                feature_pool: (0..x.n_cols()).collect(),
            };
            builder.build(deadline)
        })
        .collect::<Result<_>>()?;
    Ok(ExtraTreesModel {
        trees,
        n_features: x.n_cols(),
        n_classes,
        params: params.clone(),
    })
}

/// Per-row class distributions: the average of normalized leaf counts.
pub fn class_distributions(model: &ExtraTreesModel, x: &SparseMatrix) -> Result<Vec<Vec<f64>>> {
    if x.n_cols() != model.n_features {
        return Err(Error::Shape(format!(
            "model expects {} features, input has {}",
            model.n_features,
            x.n_cols()
        )));
    }
    let n_trees = model.trees.len() as f64;
    Ok((0..x.n_rows())
        .map(|i| {
            let mut dist = vec![0.0; model.n_classes];
            for tree in &model.trees {
                let counts = tree.leaf_counts(x, i);
                let total: u64 = counts.iter().sum();
                for (d, &c) in dist.iter_mut().zip(counts) {
                    *d += c as f64 / total as f64;
                }
            }
            for d in &mut dist {
                *d /= n_trees;
            }
            dist
        })
        .collect())
}

/// Index of the largest value, lowest index winning ties.
pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Predict class labels by averaged leaf distributions.
pub fn predict_forest(model: &ExtraTreesModel, x: &SparseMatrix) -> Result<Vec<usize>> {
    Ok(class_distributions(model, x)?
        .iter()
        .map(|dist| argmax_lowest(dist))
        .collect())
}

/// Mean of per-tree normalized split gains, renormalized to sum to 1.
///
/// All-zero when no tree ever split.
pub fn feature_importances(model: &ExtraTreesModel) -> Vec<f64> {
    let mut mean = vec![0.0; model.n_features];
    for tree in &model.trees {
        let mut imp = vec![0.0; model.n_features];
        for node in &tree.nodes {
            if let TreeNode::Split { feature, gain, .. } = node {
                imp[*feature] += gain;
            }
        }
        let total: f64 = imp.iter().sum();
        if total > 0.0 {
            for (m, v) in mean.iter_mut().zip(imp) {
                *m += v / total;
            }
        }
    }
    let total: f64 = mean.iter().sum();
    if total > 0.0 {
        for m in &mut mean {
            *m /= total;
        }
    }
    mean
}
