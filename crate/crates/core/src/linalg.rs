//! Dense row-major matrices and LU factorization with partial pivoting.
//!
//! Rows are equilibrated by powers of two before factoring, which is exact and
//! keeps unit boundary rows from being swamped by `1/h²` interior rows.
//!
//! The factorization tracks, per row, the leftmost stored multiplier and the
//! rightmost nonzero of the upper factor, so banded inputs (every grid
//! operator here) factor in `O(n·bw²)` instead of `O(n³)` without changing the
//! pivoting sequence of the plain dense algorithm.

use std::ops::{Index, IndexMut};

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok((0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// `P·A = L·U` with unit lower `L`; both factors share one dense buffer.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    n: usize,
    lu: Vec<f64>,
    /// perm[k] = original row now in position k
    perm: Vec<usize>,
    /// leftmost column holding a multiplier in row k
    l_start: Vec<usize>,
    /// rightmost nonzero column of U in row k
    u_end: Vec<usize>,
    /// power-of-two scale applied to original row i
    row_scale: Vec<f64>,
}

fn pow2_scale(row: &[f64]) -> f64 {
    let m = row.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if m == 0.0 || !m.is_finite() {
        return 1.0;
    }
    // 2^-e with 2^e the power of two nearest below m
    let e = m.log2().floor() as i32;
    2.0_f64.powi(-e)
}

impl LuFactorization {
    /// Factors `a`; fails with the offending pivot index when a pivot is below
    /// `n·ε` times the largest entry of the equilibrated matrix.
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        let n = a.n;
        let mut lu = a.data.clone();
        let mut row_scale = vec![1.0; n];
        for (i, row) in lu.chunks_mut(n.max(1)).enumerate().take(n) {
            row_scale[i] = pow2_scale(row);
            row.iter_mut().for_each(|v| *v *= row_scale[i]);
        }
        let max_abs = lu.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut perm: Vec<usize> = (0..n).collect();
        let mut l_start = vec![0; n];
        let mut u_end = vec![0; n];
        for i in 0..n {
            let row = &lu[i * n..(i + 1) * n];
            l_start[i] = row.iter().position(|&v| v != 0.0).unwrap_or(n);
            u_end[i] = row.iter().rposition(|&v| v != 0.0).unwrap_or(0);
        }
        // rows whose unreduced part still starts at or before column k
        let mut front = l_start.clone();
        let tiny = n as f64 * f64::EPSILON * max_abs;

        for k in 0..n {
            let mut piv = k;
            let mut best = -1.0;
            for i in k..n {
                if front[i] <= k {
                    let v = lu[i * n + k].abs();
                    if v > best {
                        best = v;
                        piv = i;
                    }
                }
            }
            if best <= tiny {
                return Err(Error::Singular { pivot: k });
            }
            if piv != k {
                let (top, bottom) = lu.split_at_mut(piv * n);
                top[k * n..(k + 1) * n].swap_with_slice(&mut bottom[..n]);
                perm.swap(k, piv);
                l_start.swap(k, piv);
                u_end.swap(k, piv);
                front.swap(k, piv);
            }
            let end = u_end[k];
            let (head, tail) = lu.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..(k + 1) * n];
            let pivot = pivot_row[k];
            for i in (k + 1)..n {
                if front[i] > k {
                    continue;
                }
                let row = &mut tail[(i - k - 1) * n..(i - k) * n];
                let m = row[k] / pivot;
                row[k] = m;
                front[i] = k + 1;
                if m == 0.0 {
                    continue;
                }
                for (x, p) in row[k + 1..=end.max(k)].iter_mut().zip(&pivot_row[k + 1..=end.max(k)]) {
                    *x -= m * p;
                }
                u_end[i] = u_end[i].max(end);
            }
        }
        Ok(Self { n, lu, perm, l_start, u_end, row_scale })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: b.len() });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p] * self.row_scale[p]).collect();
        self.solve_permuted_in_place(&mut x, 0);
        Ok(x)
    }

    /// Forward/back substitution on an already permuted right-hand side whose
    /// first `first_nz` entries are known to be zero.
    fn solve_permuted_in_place(&self, x: &mut [f64], first_nz: usize) {
        let n = self.n;
        for i in first_nz..n {
            let row = &self.lu[i * n..(i + 1) * n];
            let lo = self.l_start[i].max(first_nz);
            if lo < i {
                let s: f64 = row[lo..i].iter().zip(&x[lo..i]).map(|(l, v)| l * v).sum();
                x[i] -= s;
            }
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let hi = self.u_end[i];
            let s: f64 = if hi > i {
                row[i + 1..=hi].iter().zip(&x[i + 1..=hi]).map(|(u, v)| u * v).sum()
            } else {
                0.0
            };
            x[i] = (x[i] - s) / row[i];
        }
    }

    /// Column `j` of `A⁻¹`.
    pub fn inverse_column(&self, j: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        let pos = self.perm.iter().position(|&p| p == j).expect("permutation");
        x[pos] = self.row_scale[j];
        self.solve_permuted_in_place(&mut x, pos);
        x
    }

    /// Folds `f(col, column)` over every column of `A⁻¹` in parallel; `combine`
    /// must be associative and commutative for the result to be deterministic.
    pub fn fold_inverse_columns<T, F, C>(&self, identity: T, f: F, combine: C) -> T
    where
        T: Clone + Send + Sync,
        F: Fn(usize, &[f64]) -> T + Sync + Send,
        C: Fn(T, T) -> T + Sync + Send,
    {
        let inv_perm = {
            let mut ip = vec![0; self.n];
            for (k, &p) in self.perm.iter().enumerate() {
                ip[p] = k;
            }
            ip
        };
        (0..self.n)
            .into_par_iter()
            .map_init(
                || vec![0.0; self.n],
                |x, j| {
                    x.iter_mut().for_each(|v| *v = 0.0);
                    let pos = inv_perm[j];
                    x[pos] = self.row_scale[j];
                    self.solve_permuted_in_place(x, pos);
                    f(j, x)
                },
            )
            .reduce(|| identity.clone(), &combine)
    }

    /// Ratio of the largest to the smallest pivot magnitude.
    pub fn pivot_growth_ratio(&self) -> f64 {
        let d = (0..self.n).map(|i| self.lu[i * self.n + i].abs());
        let (lo, hi) = d.fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        hi / lo
    }
}
