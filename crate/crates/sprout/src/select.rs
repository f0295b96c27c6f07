//! Feature selection: univariate ANOVA-F percentile scoring and recursive
//! feature elimination guided by extra-trees importances.
//!
//! ANOVA statistics are computed from per-class sums and sums of squares of
//! the stored entries, with implicit zeros folded in by count — the matrix
//! is never densified.

use serde::{Deserialize, Serialize};

use crate::budget::Deadline;
use crate::error::{Error, Result};
use crate::forest::{feature_importances, fit_extra_trees, ForestParams};
use crate::sparse::SparseMatrix;

/// Sorted column ids retained by a selection step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMask {
    selected: Vec<usize>,
    n_in: usize,
}

impl FeatureMask {
    pub fn new(mut selected: Vec<usize>, n_in: usize) -> Result<FeatureMask> {
        selected.sort_unstable();
        if selected.is_empty() {
            return Err(Error::Config("a feature mask cannot be empty".into()));
        }
        if selected.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("duplicate column in feature mask".into()));
        }
        if *selected.last().unwrap() >= n_in {
            return Err(Error::Shape(format!(
                "mask column {} out of range for {n_in} inputs",
                selected.last().unwrap()
            )));
        }
        Ok(FeatureMask { selected, n_in })
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// Columns not selected, also sorted.
    pub fn complement(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_in - self.selected.len());
        let mut it = self.selected.iter().peekable();
        for col in 0..self.n_in {
            if it.peek() == Some(&&col) {
                it.next();
            } else {
                out.push(col);
            }
        }
        out
    }

    /// Keep only the selected columns of `x`.
    pub fn apply(&self, x: &SparseMatrix) -> Result<SparseMatrix> {
        if x.n_cols() != self.n_in {
            return Err(Error::Shape(format!(
                "mask fitted on {} columns, input has {}",
                self.n_in,
                x.n_cols()
            )));
        }
        x.select_columns(&self.selected)
    }
}

/// One-way ANOVA F statistic per feature, class-partitioned.
///
/// Zero variance everywhere scores 0; zero within-class variance with
/// positive between-class variance maps to `f64::MAX` so the ordering stays
/// total.
pub fn anova_f_scores(x: &SparseMatrix, y: &[usize]) -> Result<Vec<f64>> {
    if x.n_rows() != y.len() {
        return Err(Error::Shape(format!(
            "{} rows but {} labels",
            x.n_rows(),
            y.len()
        )));
    }
    let n = x.n_rows();
    let n_classes = y.iter().max().map_or(0, |&m| m + 1);
    let mut class_sizes = vec![0usize; n_classes];
    for &l in y {
        class_sizes[l] += 1;
    }
    let present: Vec<usize> = (0..n_classes).filter(|&c| class_sizes[c] > 0).collect();
    let k = present.len();
    if k < 2 {
        return Err(Error::Domain(
            "ANOVA needs at least two classes with samples".into(),
        ));
    }

    let n_cols = x.n_cols();
    // Per (class, feature) sums and sums of squares over stored entries;
    // implicit zeros contribute nothing to either.
    let mut sums = vec![0.0f64; n_classes * n_cols];
    let mut sq_sums = vec![0.0f64; n_classes * n_cols];
    for (i, &c) in y.iter().enumerate() {
        for (j, v) in x.iter_row(i) {
            sums[c * n_cols + j] += v;
            sq_sums[c * n_cols + j] += v * v;
        }
    }

    let df_between = (k - 1) as f64;
    let df_within = (n - k) as f64;
    let mut scores = Vec::with_capacity(n_cols);
    for j in 0..n_cols {
        let mut total = 0.0;
        let mut ss_within = 0.0;
        let mut between_acc = 0.0;
        for &c in &present {
            let s = sums[c * n_cols + j];
            let sq = sq_sums[c * n_cols + j];
            let nc = class_sizes[c] as f64;
            ss_within += (sq - s * s / nc).max(0.0);
            between_acc += s * s / nc;
            total += s;
        }
        let ss_between = (between_acc - total * total / n as f64).max(0.0);
        let score = if ss_within == 0.0 {
            if ss_between == 0.0 {
                0.0
            } else {
                f64::MAX
            }
        } else if df_within == 0.0 {
            f64::MAX
        } else {
            (ss_between / df_between) / (ss_within / df_within)
        };
        scores.push(score);
    }
    Ok(scores)
}

/// Number of features kept by a percentile selection over `n` scores.
///
/// Ceiling of `n * percentile / 100`, with integer-valued products protected
/// from floating-point overshoot, and at least one feature kept.
fn percentile_count(n: usize, percentile: f64) -> usize {
    let exact = n as f64 * percentile / 100.0;
    let kept = if (exact - exact.round()).abs() < 1e-9 {
        exact.round() as usize
    } else {
        exact.ceil() as usize
    };
    kept.clamp(1, n)
}

/// Keep the top `percentile` percent of features by score, ties broken
/// toward lower column ids.
pub fn select_percentile(scores: &[f64], percentile: f64) -> Result<FeatureMask> {
    if scores.is_empty() {
        return Err(Error::Config(
            "cannot select a percentile of zero features".into(),
        ));
    }
    if !(percentile > 0.0 && percentile <= 100.0) {
        return Err(Error::Config(format!(
            "percentile must be in (0, 100], got {percentile}"
        )));
    }
    let keep = percentile_count(scores.len(), percentile);
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| a.cmp(&b))
    });
    order.truncate(keep);
    FeatureMask::new(order, scores.len())
}

/// Recursive feature elimination down to exactly `target_n` columns.
///
/// Each round fits a forest on the survivors and drops the lowest-importance
/// `max(1, floor(step_fraction * surviving))` columns, never crossing
/// `target_n`. Importance ties drop the higher column id first.
pub fn rfe(
    x: &SparseMatrix,
    y: &[usize],
    target_n: usize,
    step_fraction: f64,
    fp: &ForestParams,
    deadline: Deadline,
) -> Result<FeatureMask> {
    if target_n < 1 || target_n > x.n_cols() {
        return Err(Error::Config(format!(
            "target_n {target_n} out of range for {} columns",
            x.n_cols()
        )));
    }
    if !(step_fraction > 0.0 && step_fraction < 1.0) {
        return Err(Error::Config(format!(
            "step_fraction must be in (0, 1), got {step_fraction}"
        )));
    }
    let mut surviving: Vec<usize> = (0..x.n_cols()).collect();
    while surviving.len() > target_n {
        deadline.check()?;
        let sub = x.select_columns(&surviving)?;
        let model = fit_extra_trees(&sub, y, fp, deadline)?;
        let importances = feature_importances(&model);
        let step = ((step_fraction * surviving.len() as f64).floor() as usize).max(1);
        let drop_n = step.min(surviving.len() - target_n);
        // Rank local columns worst-first; ties drop the higher original id.
        let mut order: Vec<usize> = (0..surviving.len()).collect();
        order.sort_by(|&a, &b| {
            importances[a]
                .total_cmp(&importances[b])
                .then_with(|| b.cmp(&a))
        });
        let mut doomed: Vec<usize> = order[..drop_n].to_vec();
        doomed.sort_unstable_by(|a, b| b.cmp(a));
        for local in doomed {
            surviving.remove(local);
        }
    }
    FeatureMask::new(surviving, x.n_cols())
}
