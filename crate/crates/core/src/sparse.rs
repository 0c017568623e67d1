//! Square sparse matrices in compressed-row form.
//!
//! Rows are stored with strictly increasing column indices and explicit zeros
//! are never kept, so the stored pattern is the nonzero pattern.

use crate::error::{invalid, Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Row-by-row builder. Rows must be started in order; entries within a row
/// may arrive in any order and duplicates are summed.
#[derive(Debug)]
pub struct SparseBuilder {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    pending: Vec<(usize, f64)>,
}

impl SparseBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            row_ptr: vec![0],
            cols: Vec::new(),
            vals: Vec::new(),
            pending: Vec::new(),
        }
    }

    /// Adds `value` at `col` of the current row.
    pub fn push(&mut self, col: usize, value: f64) {
        debug_assert!(col < self.n);
        self.pending.push((col, value));
    }

    /// Closes the current row.
    pub fn finish_row(&mut self) {
        self.pending.sort_by_key(|&(c, _)| c);
        let mut k = 0;
        while k < self.pending.len() {
            let col = self.pending[k].0;
            let mut v = 0.0;
            while k < self.pending.len() && self.pending[k].0 == col {
                v += self.pending[k].1;
                k += 1;
            }
            if v != 0.0 {
                self.cols.push(col);
                self.vals.push(v);
            }
        }
        self.pending.clear();
        self.row_ptr.push(self.cols.len());
    }

    pub fn build(mut self) -> SparseMatrix {
        if !self.pending.is_empty() {
            self.finish_row();
        }
        while self.row_ptr.len() <= self.n {
            self.row_ptr.push(self.cols.len());
        }
        assert_eq!(self.row_ptr.len(), self.n + 1, "more rows than the matrix dimension");
        SparseMatrix {
            n: self.n,
            row_ptr: self.row_ptr,
            cols: self.cols,
            vals: self.vals,
        }
    }
}

impl SparseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            row_ptr: vec![0; n + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut b = SparseBuilder::new(d.len());
        for (i, &v) in d.iter().enumerate() {
            b.push(i, v);
            b.finish_row();
        }
        b.build()
    }

    /// From dense rows; all rows must have length `rows.len()`.
    pub fn from_dense_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut b = SparseBuilder::new(n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                b.push(j, v);
            }
            b.finish_row();
        }
        Ok(b.build())
    }

    /// From 0-based `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<_> = triplets.to_vec();
        if let Some(&(r, c, _)) = sorted.iter().find(|&&(r, c, _)| r >= n || c >= n) {
            return Err(invalid(format!("entry ({r}, {c}) outside a {n}x{n} matrix")));
        }
        sorted.sort_by_key(|&(r, _, _)| r);
        let mut b = SparseBuilder::new(n);
        let mut current = 0;
        for (r, c, v) in sorted {
            while current < r {
                b.finish_row();
                current += 1;
            }
            b.push(c, v);
        }
        while current < n {
            b.finish_row();
            current += 1;
        }
        Ok(b.build())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// Coordinate view in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok((0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect())
    }

    /// Keeps the entries for which `keep(row, col, value)` holds.
    pub fn filter(&self, mut keep: impl FnMut(usize, usize, f64) -> bool) -> Self {
        let mut b = SparseBuilder::new(self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                if keep(i, j, v) {
                    b.push(j, v);
                }
            }
            b.finish_row();
        }
        b.build()
    }

    /// Entrywise sum. Entries present in only one operand are copied bitwise.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut b = SparseBuilder::new(self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i).chain(other.row(i)) {
                b.push(j, v);
            }
            b.finish_row();
        }
        Ok(b.build())
    }

    /// `self · diag(d) · other`.
    pub fn mul_diag_mul(&self, d: &[f64], other: &Self) -> Result<Self> {
        if other.n != self.n || d.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n.min(d.len()) });
        }
        let mut b = SparseBuilder::new(self.n);
        for i in 0..self.n {
            for (k, a) in self.row(i) {
                let ad = a * d[k];
                for (j, c) in other.row(k) {
                    b.push(j, ad * c);
                }
            }
            b.finish_row();
        }
        Ok(b.build())
    }

    /// True iff both matrices store exactly the same set of positions.
    pub fn same_pattern(&self, other: &Self) -> bool {
        self.n == other.n && self.row_ptr == other.row_ptr && self.cols == other.cols
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }
}
