//! Confusion matrices and the precision/recall/F1 family.
//!
//! Zero denominators yield 0 rather than NaN, and macro-F1 averages over the
//! whole label space (absent classes score 0), which matches shared-task
//! scoring where rare classes may never be predicted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// k x k confusion counts; entry `(i, j)` = true class `i` predicted as `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
    k: usize,
}

impl ConfusionMatrix {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<ConfusionMatrix> {
        let k = counts.len();
        if counts.iter().any(|row| row.len() != k) {
            return Err(Error::Shape("confusion matrix must be square".into()));
        }
        Ok(ConfusionMatrix { counts, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|i| self.counts[i][i]).sum()
    }
}

/// Tally true/predicted label pairs into a k-class confusion matrix.
pub fn confusion_matrix(y_true: &[usize], y_pred: &[usize], k: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Shape(format!(
            "{} true labels vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut counts = vec![vec![0u64; k]; k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= k || p >= k {
            return Err(Error::Domain(format!(
                "label {} out of range for k={k}",
                t.max(p)
            )));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts, k })
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_from_precision_recall(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn safe_div(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Binary evaluation treating class 1 as positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

/// Precision/recall/F1/accuracy from a 2x2 confusion matrix (positive = 1).
pub fn binary_report(cm: &ConfusionMatrix) -> Result<BinaryReport> {
    if cm.k() != 2 {
        return Err(Error::Shape(format!(
            "binary report needs k=2, got k={}",
            cm.k()
        )));
    }
    let tp = cm.counts[1][1] as f64;
    let fp = cm.counts[0][1] as f64;
    let fn_ = cm.counts[1][0] as f64;
    let tn = cm.counts[0][0] as f64;
    let precision = safe_div(tp, tp + fp);
    let recall = safe_div(tp, tp + fn_);
    Ok(BinaryReport {
        precision,
        recall,
        f1: f1_from_precision_recall(precision, recall),
        accuracy: safe_div(tp + tn, tp + fp + fn_ + tn),
    })
}

/// Micro/macro-averaged evaluation over the full label space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MulticlassReport {
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub per_class_f1: Vec<f64>,
}

/// Per-class, micro- and macro-F1 plus accuracy from a confusion matrix.
pub fn multiclass_report(cm: &ConfusionMatrix) -> Result<MulticlassReport> {
    if cm.k() < 2 {
        return Err(Error::Shape(format!(
            "multiclass report needs k>=2, got k={}",
            cm.k()
        )));
    }
    let k = cm.k();
    let mut per_class_f1 = Vec::with_capacity(k);
    let mut pooled_tp = 0.0;
    let mut pooled_fp = 0.0;
    let mut pooled_fn = 0.0;
    for c in 0..k {
        let tp = cm.counts[c][c] as f64;
        let fp: f64 = (0..k).filter(|&r| r != c).map(|r| cm.counts[r][c] as f64).sum();
        let fn_: f64 = (0..k).filter(|&p| p != c).map(|p| cm.counts[c][p] as f64).sum();
        let precision = safe_div(tp, tp + fp);
        let recall = safe_div(tp, tp + fn_);
        per_class_f1.push(f1_from_precision_recall(precision, recall));
        pooled_tp += tp;
        pooled_fp += fp;
        pooled_fn += fn_;
    }
    let micro_f1 = safe_div(2.0 * pooled_tp, 2.0 * pooled_tp + pooled_fp + pooled_fn);
    let macro_f1 = per_class_f1.iter().sum::<f64>() / k as f64;
    let accuracy = safe_div(cm.trace() as f64, cm.total() as f64);
    Ok(MulticlassReport {
        micro_f1,
        macro_f1,
        accuracy,
        per_class_f1,
    })
}

fn percent(v: f64) -> String {
    format!("{:.2}%", v * 100.0)
}

impl BinaryReport {
    /// Aligned human-readable table, percentages at two decimals.
    pub fn render_text(&self) -> String {
        format!(
            "Precision  {:>8}\nRecall     {:>8}\nF1         {:>8}\nAccuracy   {:>8}\n",
            percent(self.precision),
            percent(self.recall),
            percent(self.f1),
            percent(self.accuracy)
        )
    }

    /// `key=value` lines, fractions at four decimals.
    pub fn render_kv(&self, prefix: &str) -> String {
        format!(
            "{p}precision={:.4}\n{p}recall={:.4}\n{p}f1={:.4}\n{p}accuracy={:.4}\n",
            self.precision,
            self.recall,
            self.f1,
            self.accuracy,
            p = prefix
        )
    }
}

impl MulticlassReport {
    /// Aligned human-readable table, percentages at two decimals.
    pub fn render_text(&self) -> String {
        let per_class = self
            .per_class_f1
            .iter()
            .map(|&f| percent(f))
            .collect::<Vec<_>>()
            .join(" ");
        format!(
            "Micro-F1   {:>8}\nMacro-F1   {:>8}\nAccuracy   {:>8}\nPer-class F1: {}\n",
            percent(self.micro_f1),
            percent(self.macro_f1),
            percent(self.accuracy),
            per_class
        )
    }

    /// `key=value` lines, fractions at four decimals.
    pub fn render_kv(&self, prefix: &str) -> String {
        let per_class = self
            .per_class_f1
            .iter()
            .map(|f| format!("{f:.4}"))
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "{p}micro_f1={:.4}\n{p}macro_f1={:.4}\n{p}accuracy={:.4}\n{p}per_class_f1={}\n",
            self.micro_f1,
            self.macro_f1,
            self.accuracy,
            per_class,
            p = prefix
        )
    }
}
