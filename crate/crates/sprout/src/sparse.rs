//! Compressed sparse row matrices.
//!
//! Bag-of-words count matrices are overwhelmingly zero, so every feature
//! transform and estimator in this crate works on this CSR type and never
//! densifies. Stored entries are always nonzero and finite, and column
//! indices are strictly increasing within a row; [`SparseMatrix::validate`]
//! re-checks the full structural contract.

use crate::error::{Error, Result};

/// Row-major compressed sparse matrix of `f64` values.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Build a matrix from raw CSR arrays, validating the structural contract.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<SparseMatrix> {
        let m = SparseMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        };
        m.validate()?;
        Ok(m)
    }

    /// An all-zero matrix of the given shape.
    pub fn zeros(n_rows: usize, n_cols: usize) -> SparseMatrix {
        SparseMatrix {
            n_rows,
            n_cols,
            row_offsets: vec![0; n_rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Assemble from per-row `(column, value)` entry lists.
    ///
    /// Entries must be sorted by column with no duplicates; zero values are
    /// dropped rather than stored.
    pub fn from_rows(n_cols: usize, rows: &[Vec<(usize, f64)>]) -> Result<SparseMatrix> {
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for row in rows {
            for &(col, value) in row {
                if value != 0.0 {
                    col_indices.push(col);
                    values.push(value);
                }
            }
            row_offsets.push(col_indices.len());
        }
        SparseMatrix::new(rows.len(), n_cols, row_offsets, col_indices, values)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Iterate the stored entries of row `i` as `(column, value)`.
    pub fn iter_row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (cols, vals) = self.row(i);
        cols.iter().copied().zip(vals.iter().copied())
    }

    /// Value at `(i, j)`, implicit zeros included.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    /// Dot product of row `i` with a dense vector.
    pub fn dot_row(&self, i: usize, dense: &[f64]) -> f64 {
        debug_assert_eq!(dense.len(), self.n_cols);
        let (cols, vals) = self.row(i);
        cols.iter()
            .zip(vals)
            .map(|(&c, &v)| v * dense[c])
            .sum()
    }

    /// Sum of the stored values of row `i`.
    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).1.iter().sum()
    }

    /// New matrix keeping only the columns in `keep` (sorted, strictly
    /// increasing), renumbered to `0..keep.len()`.
    pub fn select_columns(&self, keep: &[usize]) -> Result<SparseMatrix> {
        if keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "column selection must be sorted and strictly increasing".into(),
            ));
        }
        if let Some(&last) = keep.last() {
            if last >= self.n_cols {
                return Err(Error::Shape(format!(
                    "selected column {last} out of range for {} columns",
                    self.n_cols
                )));
            }
        }
        let mut new_id = vec![usize::MAX; self.n_cols];
        for (rank, &col) in keep.iter().enumerate() {
            new_id[col] = rank;
        }
        let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for i in 0..self.n_rows {
            for (col, value) in self.iter_row(i) {
                if new_id[col] != usize::MAX {
                    col_indices.push(new_id[col]);
                    values.push(value);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseMatrix {
            n_rows: self.n_rows,
            n_cols: keep.len(),
            row_offsets,
            col_indices,
            values,
        })
    }

    /// New matrix keeping only the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<SparseMatrix> {
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for &r in rows {
            if r >= self.n_rows {
                return Err(Error::Shape(format!(
                    "selected row {r} out of range for {} rows",
                    self.n_rows
                )));
            }
            let (cols, vals) = self.row(r);
            col_indices.extend_from_slice(cols);
            values.extend_from_slice(vals);
            row_offsets.push(col_indices.len());
        }
        Ok(SparseMatrix {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Check every structural invariant of the CSR layout.
    pub fn validate(&self) -> Result<()> {
        if self.row_offsets.len() != self.n_rows + 1 {
            return Err(Error::Shape(format!(
                "row_offsets length {} does not match {} rows",
                self.row_offsets.len(),
                self.n_rows
            )));
        }
        if self.row_offsets[0] != 0 {
            return Err(Error::Shape("row_offsets must start at 0".into()));
        }
        if *self.row_offsets.last().unwrap() != self.values.len()
            || self.col_indices.len() != self.values.len()
        {
            return Err(Error::Shape(
                "row_offsets end, col_indices and values disagree on nnz".into(),
            ));
        }
        if self.row_offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Shape("row_offsets must be non-decreasing".into()));
        }
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Shape(format!(
                    "row {i} column indices not strictly increasing"
                )));
            }
            if cols.iter().any(|&c| c >= self.n_cols) {
                return Err(Error::Shape(format!("row {i} has column out of range")));
            }
            for &v in vals {
                if !v.is_finite() {
                    return Err(Error::Numeric(format!("row {i} stores non-finite value")));
                }
                if v == 0.0 {
                    return Err(Error::Shape(format!("row {i} stores an explicit zero")));
                }
            }
        }
        Ok(())
    }

    /// Dense copy, for small matrices in tests and examples.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.iter_row(i) {
                row[j] = v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SparseMatrix {
        // [[1, 0, 2], [0, 0, 0], [0, 3, 0]]
        SparseMatrix::new(3, 3, vec![0, 2, 2, 3], vec![0, 2, 1], vec![1.0, 2.0, 3.0]).unwrap()
    }

    #[test]
    fn get_sees_implicit_zeros() {
        let m = small();
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.get(1, 2), 0.0);
        assert_eq!(m.get(2, 1), 3.0);
    }

    #[test]
    fn from_rows_drops_zeros() {
        let m = SparseMatrix::from_rows(4, &[vec![(0, 1.0), (2, 0.0), (3, 2.0)]]).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 2), 0.0);
        m.validate().unwrap();
    }

    #[test]
    fn rejects_unsorted_columns() {
        let err = SparseMatrix::new(1, 3, vec![0, 2], vec![2, 0], vec![1.0, 1.0]);
        assert!(matches!(err, Err(Error::Shape(_))));
    }

    #[test]
    fn rejects_explicit_zero() {
        let err = SparseMatrix::new(1, 2, vec![0, 1], vec![0], vec![0.0]);
        assert!(matches!(err, Err(Error::Shape(_))));
    }

    #[test]
    fn rejects_non_finite() {
        let err = SparseMatrix::new(1, 2, vec![0, 1], vec![0], vec![f64::NAN]);
        assert!(matches!(err, Err(Error::Numeric(_))));
    }

    #[test]
    fn rejects_column_out_of_range() {
        let err = SparseMatrix::new(1, 2, vec![0, 1], vec![5], vec![1.0]);
        assert!(matches!(err, Err(Error::Shape(_))));
    }

    #[test]
    fn select_columns_renumbers() {
        let m = small();
        let s = m.select_columns(&[1, 2]).unwrap();
        assert_eq!(s.n_cols(), 2);
        assert_eq!(s.to_dense(), vec![vec![0.0, 2.0], vec![0.0, 0.0], vec![3.0, 0.0]]);
        s.validate().unwrap();
    }

    #[test]
    fn select_columns_rejects_unsorted() {
        assert!(small().select_columns(&[2, 1]).is_err());
        assert!(small().select_columns(&[1, 1]).is_err());
    }

    #[test]
    fn select_rows_reorders() {
        let m = small();
        let s = m.select_rows(&[2, 0]).unwrap();
        assert_eq!(s.to_dense(), vec![vec![0.0, 3.0, 0.0], vec![1.0, 0.0, 2.0]]);
        s.validate().unwrap();
    }

    #[test]
    fn dot_row_matches_dense() {
        let m = small();
        let w = [2.0, 5.0, -1.0];
        assert_eq!(m.dot_row(0, &w), 1.0 * 2.0 - 2.0);
        assert_eq!(m.dot_row(1, &w), 0.0);
    }

    #[test]
    fn zeros_is_valid() {
        let m = SparseMatrix::zeros(4, 7);
        m.validate().unwrap();
        assert_eq!(m.nnz(), 0);
        assert_eq!(m.n_cols(), 7);
    }
}
