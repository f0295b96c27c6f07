//! Corpus loading and cross-validation folds.
//!
//! The on-disk layout is a pair of plain-text files: one document per line
//! and one tag per line, matched by position. Files are UTF-8; LF and CRLF
//! both work and a single trailing blank line (a final newline) is ignored.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Labeled documents plus the ordered tag vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    documents: Vec<String>,
    labels: Vec<usize>,
    label_names: Vec<String>,
}

impl Dataset {
    /// Build a dataset, checking the label/document contract.
    pub fn new(
        documents: Vec<String>,
        labels: Vec<usize>,
        label_names: Vec<String>,
    ) -> Result<Dataset> {
        if documents.len() != labels.len() {
            return Err(Error::Format(format!(
                "{} documents but {} labels",
                documents.len(),
                labels.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &label_names {
            if !seen.insert(name) {
                return Err(Error::Label(format!("duplicate label name {name:?}")));
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= label_names.len()) {
            return Err(Error::Label(format!(
                "label id {bad} out of range for {} label names",
                label_names.len()
            )));
        }
        Ok(Dataset {
            documents,
            labels,
            label_names,
        })
    }

    pub fn documents(&self) -> &[String] {
        &self.documents
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    /// Rows per class id, over the full label space.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.label_names.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Number of distinct classes actually present.
    pub fn n_present_classes(&self) -> usize {
        self.class_counts().iter().filter(|&&c| c > 0).count()
    }

    /// New dataset holding the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            documents: rows.iter().map(|&i| self.documents[i].clone()).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            label_names: self.label_names.clone(),
        }
    }
}

/// A stratified k-fold split: per fold, train indices and validation indices.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldPlan {
    folds: Vec<(Vec<usize>, Vec<usize>)>,
    k: usize,
    seed: u64,
}

impl FoldPlan {
    pub fn folds(&self) -> &[(Vec<usize>, Vec<usize>)] {
        &self.folds
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Split file contents into logical lines: LF or CRLF, final newline ignored.
fn split_lines(content: &str) -> Vec<String> {
    let mut lines: Vec<String> = content
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect();
    if lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines
}

/// Read a document file: one document per line.
pub fn read_documents(path: impl AsRef<Path>) -> Result<Vec<String>> {
    Ok(split_lines(&fs::read_to_string(path)?))
}

/// Load a document file and a tag file into a [`Dataset`].
///
/// Each tag line must either match one of `label_names` or parse as an
/// integer index into it.
pub fn load_corpus(
    text_path: impl AsRef<Path>,
    label_path: impl AsRef<Path>,
    label_names: &[String],
) -> Result<Dataset> {
    let documents = split_lines(&fs::read_to_string(text_path)?);
    let tag_lines = split_lines(&fs::read_to_string(label_path)?);
    if documents.len() != tag_lines.len() {
        return Err(Error::Format(format!(
            "text file has {} lines but label file has {}",
            documents.len(),
            tag_lines.len()
        )));
    }
    let mut labels = Vec::with_capacity(tag_lines.len());
    for (line_no, tag) in tag_lines.iter().enumerate() {
        let tag = tag.trim();
        let id = match label_names.iter().position(|n| n == tag) {
            Some(id) => id,
            None => match tag.parse::<usize>() {
                Ok(id) if id < label_names.len() => id,
                _ => {
                    return Err(Error::Label(format!(
                        "line {}: unknown tag {tag:?}",
                        line_no + 1
                    )))
                }
            },
        };
        labels.push(id);
    }
    Dataset::new(documents, labels, label_names.to_vec())
}

/// Collect the distinct tags of a label file, sorted, for use as label names.
pub fn infer_label_names(label_paths: &[impl AsRef<Path>]) -> Result<Vec<String>> {
    let mut names = HashSet::new();
    for path in label_paths {
        for tag in split_lines(&fs::read_to_string(path)?) {
            names.insert(tag.trim().to_string());
        }
    }
    let mut names: Vec<String> = names.into_iter().collect();
    names.sort();
    Ok(names)
}

/// Deterministic stratified k-fold plan.
///
/// Rows of each class are shuffled with a ChaCha8 stream seeded from `seed`
/// and dealt round-robin across folds, with a rotating start so remainders
/// spread evenly. Validation sets partition `0..n`; per class, fold counts
/// differ by at most one.
pub fn stratified_kfold(ds: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("k must be at least 2, got {k}")));
    }
    let counts = ds.class_counts();
    let min_present = counts.iter().copied().filter(|&c| c > 0).min().unwrap_or(0);
    if min_present < k {
        return Err(Error::Config(format!(
            "k={k} exceeds the smallest class count {min_present}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; ds.len()];
    let mut offset = 0usize;
    for class in 0..ds.n_classes() {
        let mut rows: Vec<usize> = (0..ds.len()).filter(|&i| ds.labels()[i] == class).collect();
        rows.shuffle(&mut rng);
        for (j, &row) in rows.iter().enumerate() {
            fold_of[row] = (offset + j) % k;
        }
        offset += rows.len();
    }

    let mut folds = Vec::with_capacity(k);
    for fold in 0..k {
        let valid: Vec<usize> = (0..ds.len()).filter(|&i| fold_of[i] == fold).collect();
        let train: Vec<usize> = (0..ds.len()).filter(|&i| fold_of[i] != fold).collect();
        folds.push((train, valid));
    }
    Ok(FoldPlan { folds, k, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn names(tags: &[&str]) -> Vec<String> {
        tags.iter().map(|s| s.to_string()).collect()
    }

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_empty_files() {
        let text = write_temp("");
        let tags = write_temp("");
        let ds = load_corpus(text.path(), tags.path(), &names(&["0", "1"])).unwrap();
        assert_eq!(ds.len(), 0);
    }

    #[test]
    fn load_three_line_fixture() {
        let text = write_temp("ala ma kota\ndrugi tweet\ntrzeci\n");
        let tags = write_temp("0\n1\n0\n");
        let ds = load_corpus(text.path(), tags.path(), &names(&["0", "1"])).unwrap();
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.documents()[1], "drugi tweet");
    }

    #[test]
    fn load_crlf_and_tag_names() {
        let text = write_temp("one\r\ntwo\r\n");
        let tags = write_temp("spam\r\nham\r\n");
        let ds = load_corpus(text.path(), tags.path(), &names(&["ham", "spam"])).unwrap();
        assert_eq!(ds.labels(), &[1, 0]);
    }

    #[test]
    fn line_count_mismatch_is_format_error() {
        let text = write_temp("a\nb\nc\n");
        let tags = write_temp("0\n1\n");
        let err = load_corpus(text.path(), tags.path(), &names(&["0", "1"]));
        assert!(matches!(err, Err(Error::Format(_))));
    }

    #[test]
    fn unknown_tag_is_label_error() {
        let text = write_temp("a\n");
        let tags = write_temp("weird\n");
        let err = load_corpus(text.path(), tags.path(), &names(&["0", "1"]));
        assert!(matches!(err, Err(Error::Label(_))));
    }

    #[test]
    fn numeric_tags_map_by_index() {
        let text = write_temp("a\nb\n");
        let tags = write_temp("1\n0\n");
        let ds = load_corpus(text.path(), tags.path(), &names(&["non-harmful", "harmful"])).unwrap();
        assert_eq!(ds.labels(), &[1, 0]);
    }

    #[test]
    fn infer_label_names_sorts_distinct_tags() {
        let tags = write_temp("b\na\nb\nc\n");
        let inferred = infer_label_names(&[tags.path()]).unwrap();
        assert_eq!(inferred, names(&["a", "b", "c"]));
    }

    #[test]
    fn dataset_rejects_duplicate_label_names() {
        let err = Dataset::new(vec![], vec![], names(&["x", "x"]));
        assert!(matches!(err, Err(Error::Label(_))));
    }

    #[test]
    fn dataset_rejects_out_of_range_label() {
        let err = Dataset::new(vec!["d".into()], vec![2], names(&["0", "1"]));
        assert!(matches!(err, Err(Error::Label(_))));
    }

    fn toy_dataset(labels: Vec<usize>, n_classes: usize) -> Dataset {
        let docs = (0..labels.len()).map(|i| format!("doc {i}")).collect();
        let tag_names = (0..n_classes).map(|c| c.to_string()).collect();
        Dataset::new(docs, labels, tag_names).unwrap()
    }

    #[test]
    fn balanced_two_class_five_folds() {
        let labels = vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let ds = toy_dataset(labels, 2);
        let plan = stratified_kfold(&ds, 5, 7).unwrap();
        for (_, valid) in plan.folds() {
            assert_eq!(valid.len(), 2);
            let zeros = valid.iter().filter(|&&i| ds.labels()[i] == 0).count();
            assert_eq!(zeros, 1, "each fold holds one of each class");
        }
    }

    #[test]
    fn k_of_one_is_config_error() {
        let ds = toy_dataset(vec![0, 1, 0, 1], 2);
        assert!(matches!(stratified_kfold(&ds, 1, 0), Err(Error::Config(_))));
    }

    #[test]
    fn k_beyond_smallest_class_is_config_error() {
        let ds = toy_dataset(vec![0, 0, 0, 1, 1], 2);
        assert!(matches!(stratified_kfold(&ds, 3, 0), Err(Error::Config(_))));
    }

    #[test]
    fn same_seed_same_plan() {
        let ds = toy_dataset(vec![0, 1, 0, 1, 0, 1, 0, 1], 2);
        let a = stratified_kfold(&ds, 2, 99).unwrap();
        let b = stratified_kfold(&ds, 2, 99).unwrap();
        assert_eq!(a, b);
        let c = stratified_kfold(&ds, 2, 100).unwrap();
        assert_ne!(a, c, "different seed should shuffle differently");
    }

    fn check_plan(ds: &Dataset, plan: &FoldPlan) {
        let n = ds.len();
        let k = plan.k();
        // Validation sets partition 0..n.
        let mut seen = vec![false; n];
        for (train, valid) in plan.folds() {
            for &i in valid {
                assert!(!seen[i], "row {i} in two validation folds");
                seen[i] = true;
            }
            let valid_set: std::collections::HashSet<_> = valid.iter().collect();
            assert_eq!(train.len() + valid.len(), n);
            assert!(train.iter().all(|i| !valid_set.contains(i)));
        }
        assert!(seen.iter().all(|&s| s), "validation folds must cover all rows");
        // Per class, fold counts differ from ceil(count/k) by at most 1.
        for class in 0..ds.n_classes() {
            let total = ds.labels().iter().filter(|&&l| l == class).count();
            if total == 0 {
                continue;
            }
            let ceil = total.div_ceil(k);
            for (_, valid) in plan.folds() {
                let got = valid.iter().filter(|&&i| ds.labels()[i] == class).count();
                assert!(
                    (got as i64 - ceil as i64).abs() <= 1,
                    "class {class}: fold count {got} vs ceil {ceil}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn fold_plan_invariants(
            n in 4usize..200,
            k in prop::sample::select(vec![2usize, 3, 5]),
            n_classes in 2usize..4,
            seed in 0u64..1000,
        ) {
            // Round-robin labels guarantee every class has >= floor(n / n_classes) rows.
            let labels: Vec<usize> = (0..n).map(|i| i % n_classes).collect();
            let ds = toy_dataset(labels, n_classes);
            prop_assume!(ds.class_counts().into_iter().min().unwrap() >= k);
            let plan = stratified_kfold(&ds, k, seed).unwrap();
            check_plan(&ds, &plan);
        }
    }
}
