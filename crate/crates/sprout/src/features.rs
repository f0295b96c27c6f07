//! Text features: tokenization, count vectorization and one-hot expansion.
//!
//! Tokens are lowercased maximal runs of Unicode word characters
//! (alphanumerics or `_`) at least two characters long — the classic
//! bag-of-words default. Vocabularies are sorted lexicographically so column
//! ids are reproducible across runs and implementations.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Lowercase and split into word-character runs of length >= 2.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in lowered.chars() {
        if is_word_char(c) {
            current.push(c);
        } else if !current.is_empty() {
            if current.chars().count() >= 2 {
                tokens.push(std::mem::take(&mut current));
            } else {
                current.clear();
            }
        }
    }
    if current.chars().count() >= 2 {
        tokens.push(current);
    }
    tokens
}

/// A fitted token vocabulary: terms sorted lexicographically, column ids
/// `0..len` in that order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyDoc")]
pub struct Vocabulary {
    terms: Vec<String>,
    min_df: usize,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

/// Serialized form; the term -> column map is rebuilt on load.
#[derive(Deserialize)]
struct VocabularyDoc {
    terms: Vec<String>,
    min_df: usize,
}

impl From<VocabularyDoc> for Vocabulary {
    fn from(doc: VocabularyDoc) -> Self {
        Vocabulary::from_terms(doc.terms, doc.min_df)
    }
}

impl Vocabulary {
    fn from_terms(terms: Vec<String>, min_df: usize) -> Vocabulary {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            terms,
            min_df,
            index,
        }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_df(&self) -> usize {
        self.min_df
    }

    /// Column id of a token, if in the vocabulary.
    pub fn column(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }
}

/// Learn the vocabulary of all tokens whose document frequency is at least
/// `min_df`.
pub fn fit_vectorizer(docs: &[String], min_df: usize) -> Result<Vocabulary> {
    if min_df < 1 {
        return Err(Error::Config("min_df must be at least 1".into()));
    }
    let mut doc_freq: HashMap<String, usize> = HashMap::new();
    for doc in docs {
        let distinct: HashSet<String> = tokenize(doc).into_iter().collect();
        for token in distinct {
            *doc_freq.entry(token).or_insert(0) += 1;
        }
    }
    let mut terms: Vec<String> = doc_freq
        .into_iter()
        .filter(|&(_, df)| df >= min_df)
        .map(|(t, _)| t)
        .collect();
    terms.sort();
    Ok(Vocabulary::from_terms(terms, min_df))
}

/// Count in-vocabulary token occurrences per document into a sparse matrix
/// of shape `(docs.len(), vocab.len())`.
///
/// Documents are vectorized in parallel; the result is identical to
/// sequential processing because rows are assembled in document order.
pub fn transform_counts(docs: &[String], vocab: &Vocabulary) -> SparseMatrix {
    let rows: Vec<Vec<(usize, f64)>> = docs
        .par_iter()
        .map(|doc| {
            let mut counts: HashMap<usize, usize> = HashMap::new();
            for token in tokenize(doc) {
                if let Some(col) = vocab.column(&token) {
                    *counts.entry(col).or_insert(0) += 1;
                }
            }
            let mut entries: Vec<(usize, f64)> =
                counts.into_iter().map(|(c, n)| (c, n as f64)).collect();
            entries.sort_unstable_by_key(|&(c, _)| c);
            entries
        })
        .collect();
    SparseMatrix::from_rows(vocab.len(), &rows)
        .expect("count rows are sorted, deduplicated and nonzero")
}

/// How a single input column is encoded by [`apply_one_hot`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ColumnEncoding {
    /// Copied through unchanged to one output column.
    Passthrough { out: usize },
    /// Expanded to one indicator column per fitted value (sorted ascending).
    Categorical { values: Vec<f64>, out_start: usize },
}

/// Fitted one-hot expansion plan over the columns of a count matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneHotMap {
    columns: Vec<ColumnEncoding>,
    max_categories: usize,
    n_out: usize,
}

impl OneHotMap {
    pub fn n_in(&self) -> usize {
        self.columns.len()
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn max_categories(&self) -> usize {
        self.max_categories
    }

    pub fn columns(&self) -> &[ColumnEncoding] {
        &self.columns
    }
}

/// Mark every column with at most `max_categories` distinct observed values
/// (implicit zeros included) as categorical; the rest pass through.
pub fn fit_one_hot(x: &SparseMatrix, max_categories: usize) -> OneHotMap {
    let n_cols = x.n_cols();
    let mut stored: Vec<Vec<f64>> = vec![Vec::new(); n_cols];
    let mut stored_count = vec![0usize; n_cols];
    for i in 0..x.n_rows() {
        for (j, v) in x.iter_row(i) {
            stored[j].push(v);
            stored_count[j] += 1;
        }
    }
    let mut columns = Vec::with_capacity(n_cols);
    let mut n_out = 0usize;
    for j in 0..n_cols {
        let mut values = std::mem::take(&mut stored[j]);
        // Zero is observed whenever some row has no stored entry here.
        if stored_count[j] < x.n_rows() {
            values.push(0.0);
        }
        values.sort_unstable_by(|a, b| a.total_cmp(b));
        values.dedup();
        if values.len() <= max_categories {
            let out_start = n_out;
            n_out += values.len();
            columns.push(ColumnEncoding::Categorical { values, out_start });
        } else {
            columns.push(ColumnEncoding::Passthrough { out: n_out });
            n_out += 1;
        }
    }
    OneHotMap {
        columns,
        max_categories,
        n_out,
    }
}

/// Expand categorical columns to indicators; values unseen at fit time
/// produce all-zero indicators rather than an error.
pub fn apply_one_hot(x: &SparseMatrix, map: &OneHotMap) -> Result<SparseMatrix> {
    if x.n_cols() != map.n_in() {
        return Err(Error::Shape(format!(
            "one-hot map fitted on {} columns, input has {}",
            map.n_in(),
            x.n_cols()
        )));
    }
    // Categorical columns emit an indicator even for implicit zeros, so walk
    // the stored entries and the categorical column list together.
    let categorical: Vec<usize> = (0..map.n_in())
        .filter(|&j| matches!(map.columns[j], ColumnEncoding::Categorical { .. }))
        .collect();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(x.n_rows());
    for i in 0..x.n_rows() {
        let (cols, vals) = x.row(i);
        let mut entries = Vec::new();
        let mut a = 0; // stored entries pointer
        let mut b = 0; // categorical columns pointer
        loop {
            let next_stored = cols.get(a).copied();
            let next_cat = categorical.get(b).copied();
            let j = match (next_stored, next_cat) {
                (None, None) => break,
                (Some(s), None) => s,
                (None, Some(c)) => c,
                (Some(s), Some(c)) => s.min(c),
            };
            let value = if next_stored == Some(j) {
                let v = vals[a];
                a += 1;
                v
            } else {
                0.0
            };
            if next_cat == Some(j) {
                b += 1;
            }
            match &map.columns[j] {
                ColumnEncoding::Passthrough { out } => {
                    if value != 0.0 {
                        entries.push((*out, value));
                    }
                }
                ColumnEncoding::Categorical { values, out_start } => {
                    if let Ok(rank) = values.binary_search_by(|probe| probe.total_cmp(&value)) {
                        entries.push((out_start + rank, 1.0));
                    }
                }
            }
        }
        rows.push(entries);
    }
    SparseMatrix::from_rows(map.n_out(), &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn docs(texts: &[&str]) -> Vec<String> {
        texts.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_empty() {
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn tokenize_lowercases() {
        assert_eq!(tokenize("Ala ma kota"), vec!["ala", "ma", "kota"]);
    }

    #[test]
    fn tokenize_drops_single_chars_and_splits_on_punct() {
        assert_eq!(tokenize("a bb-cc"), vec!["bb", "cc"]);
    }

    #[test]
    fn tokenize_keeps_digits_and_underscore() {
        assert_eq!(tokenize("x9 __ hi!i"), vec!["x9", "__", "hi"]);
    }

    #[test]
    fn fit_vectorizer_sorts_terms() {
        let v = fit_vectorizer(&docs(&["ala ma", "ma psa"]), 1).unwrap();
        assert_eq!(v.terms(), &["ala", "ma", "psa"]);
        assert_eq!(v.column("ma"), Some(1));
    }

    #[test]
    fn fit_vectorizer_min_df_two() {
        let v = fit_vectorizer(&docs(&["ala ma", "ma psa"]), 2).unwrap();
        assert_eq!(v.terms(), &["ma"]);
    }

    #[test]
    fn fit_vectorizer_empty_corpus() {
        let v = fit_vectorizer(&[], 1).unwrap();
        assert!(v.is_empty());
    }

    #[test]
    fn fit_vectorizer_rejects_zero_min_df() {
        assert!(matches!(fit_vectorizer(&[], 0), Err(Error::Config(_))));
    }

    #[test]
    fn transform_counts_hand_example() {
        let v = fit_vectorizer(&docs(&["ala ma", "ma psa"]), 1).unwrap();
        let x = transform_counts(&docs(&["ma ma ala"]), &v);
        assert_eq!(x.to_dense(), vec![vec![1.0, 2.0, 0.0]]);
    }

    #[test]
    fn transform_counts_oov_only_row_is_empty() {
        let v = fit_vectorizer(&docs(&["ala ma"]), 1).unwrap();
        let x = transform_counts(&docs(&["zupa zupa"]), &v);
        assert_eq!(x.nnz(), 0);
        assert_eq!(x.n_cols(), v.len());
    }

    #[test]
    fn transform_counts_empty_doc_list() {
        let v = fit_vectorizer(&docs(&["ala ma"]), 1).unwrap();
        let x = transform_counts(&[], &v);
        assert_eq!(x.n_rows(), 0);
        assert_eq!(x.n_cols(), 2);
    }

    #[test]
    fn transform_is_idempotent() {
        let corpus = docs(&["ala ma kota", "kot ma ale", "zupa pomidorowa ma"]);
        let v = fit_vectorizer(&corpus, 1).unwrap();
        let a = transform_counts(&corpus, &v);
        let b = transform_counts(&corpus, &v);
        assert_eq!(a, b);
        a.validate().unwrap();
    }

    #[test]
    fn one_hot_binary_column_is_categorical() {
        let x = SparseMatrix::from_rows(1, &[vec![(0, 1.0)], vec![], vec![(0, 1.0)]]).unwrap();
        let map = fit_one_hot(&x, 10);
        match &map.columns()[0] {
            ColumnEncoding::Categorical { values, .. } => assert_eq!(values, &[0.0, 1.0]),
            other => panic!("expected categorical, got {other:?}"),
        }
        assert_eq!(map.n_out(), 2);
    }

    #[test]
    fn one_hot_high_cardinality_passes_through() {
        // Values 0..=11: twelve distinct values > max_categories 10.
        let rows: Vec<Vec<(usize, f64)>> =
            (0..12).map(|i| if i == 0 { vec![] } else { vec![(0, i as f64)] }).collect();
        let x = SparseMatrix::from_rows(1, &rows).unwrap();
        let map = fit_one_hot(&x, 10);
        assert!(matches!(map.columns()[0], ColumnEncoding::Passthrough { .. }));
        let y = apply_one_hot(&x, &map).unwrap();
        assert_eq!(y.to_dense(), x.to_dense());
    }

    #[test]
    fn one_hot_all_zero_column_single_category() {
        let x = SparseMatrix::zeros(3, 1);
        let map = fit_one_hot(&x, 10);
        match &map.columns()[0] {
            ColumnEncoding::Categorical { values, .. } => assert_eq!(values, &[0.0]),
            other => panic!("expected categorical, got {other:?}"),
        }
        let y = apply_one_hot(&x, &map).unwrap();
        // Every row selects the single "0" indicator.
        assert_eq!(y.to_dense(), vec![vec![1.0]; 3]);
    }

    #[test]
    fn one_hot_selects_matching_indicator() {
        // Column fitted on values {0, 1, 2}.
        let x = SparseMatrix::from_rows(1, &[vec![], vec![(0, 1.0)], vec![(0, 2.0)]]).unwrap();
        let map = fit_one_hot(&x, 10);
        let y = apply_one_hot(&x, &map).unwrap();
        // Brute-force expectation: indicator column = rank of the value.
        assert_eq!(
            y.to_dense(),
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ]
        );
    }

    #[test]
    fn one_hot_unseen_value_gives_all_zero_indicators() {
        let train = SparseMatrix::from_rows(1, &[vec![], vec![(0, 1.0)], vec![(0, 2.0)]]).unwrap();
        let map = fit_one_hot(&train, 10);
        let test = SparseMatrix::from_rows(1, &[vec![(0, 7.0)]]).unwrap();
        let y = apply_one_hot(&test, &map).unwrap();
        assert_eq!(y.to_dense(), vec![vec![0.0, 0.0, 0.0]]);
    }

    #[test]
    fn one_hot_shape_mismatch() {
        let x = SparseMatrix::zeros(2, 3);
        let map = fit_one_hot(&x, 10);
        let narrow = SparseMatrix::zeros(2, 2);
        assert!(matches!(
            apply_one_hot(&narrow, &map),
            Err(Error::Shape(_))
        ));
    }

    proptest! {
        /// Row sums equal a naive in-vocabulary token count.
        #[test]
        fn row_sums_match_naive_counter(
            texts in prop::collection::vec("[a-c ]{0,30}", 1..20),
            min_df in 1usize..3,
        ) {
            let corpus: Vec<String> = texts;
            let vocab = fit_vectorizer(&corpus, min_df).unwrap();
            let x = transform_counts(&corpus, &vocab);
            x.validate().unwrap();
            for (i, doc) in corpus.iter().enumerate() {
                let naive = tokenize(doc)
                    .iter()
                    .filter(|t| vocab.column(t).is_some())
                    .count();
                prop_assert_eq!(x.row_sum(i) as usize, naive);
            }
        }

        /// Each categorical group contributes at most one indicator per row.
        #[test]
        fn one_hot_group_sums_at_most_one(
            entries in prop::collection::vec(
                (0usize..4, 0usize..6, 1u8..4), 0..40),
            max_categories in 1usize..6,
        ) {
            let n_rows = 6;
            let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_rows];
            for (col, row, v) in entries {
                rows[row].push((col, v as f64));
            }
            for row in &mut rows {
                row.sort_unstable_by_key(|&(c, _)| c);
                row.dedup_by_key(|&mut (c, _)| c);
            }
            let x = SparseMatrix::from_rows(4, &rows).unwrap();
            let map = fit_one_hot(&x, max_categories);
            let y = apply_one_hot(&x, &map).unwrap();
            y.validate().unwrap();
            for enc in map.columns() {
                if let ColumnEncoding::Categorical { values, out_start } = enc {
                    for i in 0..y.n_rows() {
                        let group: f64 = (0..values.len())
                            .map(|r| y.get(i, out_start + r))
                            .sum();
                        prop_assert!(group <= 1.0 + 1e-12);
                    }
                }
            }
        }
    }
}
