//! M-matrix predicates and the dense inverse-positivity oracle.
//!
//! Every sign test uses one relative tolerance, [`SIGN_TOL`], scaled by the
//! largest absolute entry of the matrix under test (or of its inverse for
//! inverse tests).
//!
//! [`sufficient_mmatrix`] is the row-sum criterion applied exactly as stated:
//! it does not test irreducibility, so a reducible Z-matrix with a singular
//! zero-row-sum block can pass it. It is only meaningful on structures where
//! every row is coupled to a row with positive sum; [`exact_mmatrix_z`] is the
//! authoritative test.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::linalg::LuFactorization;
use crate::sparse::SparseMatrix;

pub const SIGN_TOL: f64 = 1e-12;

/// Positive diagonal, nonpositive off-diagonal.
pub fn is_z_matrix(a: &SparseMatrix) -> bool {
    (0..a.dim()).all(|i| {
        let mut diag_positive = false;
        for (j, v) in a.row(i) {
            if i == j {
                diag_positive = v > 0.0;
            } else if v > 0.0 {
                return false;
            }
        }
        diag_positive
    })
}

/// Z-matrix whose row sums are all nonnegative with at least one positive.
pub fn sufficient_mmatrix(a: &SparseMatrix) -> bool {
    if !is_z_matrix(a) {
        return false;
    }
    let tol = SIGN_TOL * a.max_abs();
    let sums = a.row_sums();
    sums.iter().all(|&s| s >= -tol) && sums.iter().any(|&s| s > tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MMatrixVerdict {
    pub is_m_matrix: bool,
    pub singular: bool,
}

/// For a Z-matrix: nonsingular M-matrix iff the inverse is entrywise nonnegative.
pub fn exact_mmatrix_z(a: &SparseMatrix) -> Result<MMatrixVerdict> {
    if !is_z_matrix(a) {
        return Err(invalid("exact_mmatrix_z needs a Z-matrix"));
    }
    match inverse_min_entry(a) {
        Ok(r) => Ok(MMatrixVerdict {
            is_m_matrix: r.is_nonnegative,
            singular: false,
        }),
        Err(crate::Error::Singular { .. }) => Ok(MMatrixVerdict {
            is_m_matrix: false,
            singular: true,
        }),
        Err(e) => Err(e),
    }
}

/// Smallest entry of `A⁻¹` (optionally restricted to a principal block).
#[derive(Debug, Clone, PartialEq)]
pub struct InversePositivityResult {
    pub min_entry: f64,
    pub argmin: (usize, usize),
    pub is_nonnegative: bool,
    /// max |pivot| / min |pivot| of the LU factorization
    pub condition_estimate: f64,
    /// ‖A⁻¹‖_max over the full inverse
    pub inverse_max_abs: f64,
}

impl Serialize for InversePositivityResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            min_entry: f64,
            row: usize,
            col: usize,
            is_nonnegative: bool,
            cond_est: f64,
        }
        Wire {
            min_entry: self.min_entry,
            row: self.argmin.0,
            col: self.argmin.1,
            is_nonnegative: self.is_nonnegative,
            cond_est: self.condition_estimate,
        }
        .serialize(s)
    }
}

#[derive(Clone, Copy)]
struct ColumnStats {
    min: f64,
    row: usize,
    col: usize,
    max_abs: f64,
}

impl ColumnStats {
    const EMPTY: Self = Self {
        min: f64::INFINITY,
        row: usize::MAX,
        col: usize::MAX,
        max_abs: 0.0,
    };

    // order-independent: ties broken by (col, row)
    fn merge(self, other: Self) -> Self {
        let better = |a: &Self, b: &Self| (a.min, a.col, a.row) <= (b.min, b.col, b.row);
        let (keep, _) = if better(&self, &other) { (self, other) } else { (other, self) };
        Self {
            max_abs: self.max_abs.max(other.max_abs),
            ..keep
        }
    }
}

/// Minimum entry of the full inverse.
pub fn inverse_min_entry(a: &SparseMatrix) -> Result<InversePositivityResult> {
    inverse_min_entry_masked(a, None)
}

/// Minimum over rows and columns with `mask[k] == true`; for a grid operator
/// with the interior mask this is the minimum of the interior block, i.e. of
/// the inverse of the operator restricted to interior unknowns.
pub fn inverse_min_entry_on(a: &SparseMatrix, mask: &[bool]) -> Result<InversePositivityResult> {
    if mask.len() != a.dim() {
        return Err(crate::Error::DimensionMismatch { expected: a.dim(), got: mask.len() });
    }
    inverse_min_entry_masked(a, Some(mask))
}

fn inverse_min_entry_masked(a: &SparseMatrix, mask: Option<&[bool]>) -> Result<InversePositivityResult> {
    let lu = LuFactorization::new(&a.to_dense())?;
    let stats = lu.fold_inverse_columns(
        ColumnStats::EMPTY,
        |j, col| {
            let mut st = ColumnStats::EMPTY;
            let col_in = mask.is_none_or(|m| m[j]);
            for (i, &v) in col.iter().enumerate() {
                st.max_abs = st.max_abs.max(v.abs());
                if col_in && mask.is_none_or(|m| m[i]) && v < st.min {
                    st.min = v;
                    st.row = i;
                    st.col = j;
                }
            }
            st
        },
        ColumnStats::merge,
    );
    if stats.row == usize::MAX {
        return Err(invalid("empty mask"));
    }
    Ok(InversePositivityResult {
        min_entry: stats.min,
        argmin: (stats.row, stats.col),
        is_nonnegative: stats.min >= -SIGN_TOL * stats.max_abs,
        condition_estimate: lu.pivot_growth_ratio(),
        inverse_max_abs: stats.max_abs,
    })
}

/// Discrete maximum principle: inverse nonnegative and row sums nonnegative.
pub fn dmp_verdict(a: &SparseMatrix) -> Result<bool> {
    let tol = SIGN_TOL * a.max_abs();
    let rows_ok = a.row_sums().iter().all(|&s| s >= -tol);
    Ok(rows_ok && inverse_min_entry(a)?.is_nonnegative)
}

/// `‖A·A⁻¹ − I‖_max`, with `A⁻¹` from the LU factorization.
pub fn inverse_residual(a: &SparseMatrix) -> Result<f64> {
    let lu = LuFactorization::new(&a.to_dense())?;
    Ok(lu.fold_inverse_columns(
        0.0_f64,
        |j, col| {
            (0..a.dim())
                .map(|i| {
                    let v: f64 = a.row(i).map(|(k, x)| x * col[k]).sum();
                    (v - if i == j { 1.0 } else { 0.0 }).abs()
                })
                .fold(0.0, f64::max)
        },
        f64::max,
    ))
}
