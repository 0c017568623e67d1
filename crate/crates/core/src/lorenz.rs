//! The `(ε₁, ε₂)` decomposition `A_a⁻ = A^z + A^s`, the relaxed diagonal
//! `A_{d*}`, and machine checks of the relaxed Lorenz condition.
//!
//! `A^z` takes an `ε₁` share of every single-cell coupling (the `-1/h²`
//! entries across a cell interior) and an `ε₂` share of every distance-one
//! coupling along a knot line. `A_{d*}` equals `A_d` except at interior knots,
//! where the knot diagonal `7(h_b h_{b-1} + h_a h_{a-1}) / (2 h_a h_{a-1} h_b h_{b-1})`
//! is replaced by the same expression with 8 in place of 7.
//!
//! [`certify`] passing proves `L̄_h⁻¹ ≥ 0`: it checks
//! 1. `(A_{d*} + A^z)·1 ≥ 0` with at least one positive row sum,
//! 2. `A_a⁺ ≤ A^z A_{d*}⁻¹ A^s` at every positive off-diagonal entry,
//! 3. `A^z` or `A^s` has the nonzero pattern of `A_a⁻`,
//! 4. `A^z` or `A^s` connects `N⁰(A·1)` with `N⁺(A·1)`.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::mesh::{PointClass, TensorMesh};
use crate::mmatrix::SIGN_TOL;
use crate::operator::{self, assemble, GridOperator, GridShape, GridVector};
use crate::sparse::{SparseBuilder, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzParams {
    eps1: f64,
    eps2: f64,
}

impl LorenzParams {
    /// `0 < eps1 ≤ 1`, `0 < eps2 ≤ 1`.
    pub fn new(eps1: f64, eps2: f64) -> Result<Self> {
        for (name, e) in [("eps1", eps1), ("eps2", eps2)] {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::OutOfRange(format!("{name} must lie in (0, 1], got {e}")));
            }
        }
        Ok(Self { eps1, eps2 })
    }

    pub fn eps1(&self) -> f64 {
        self.eps1
    }

    pub fn eps2(&self) -> f64 {
        self.eps2
    }

    /// `ℓ = 4·ε₂·(1 − ε₁)`, in `[0, 4)`.
    pub fn ell(&self) -> f64 {
        4.0 * self.eps2 * (1.0 - self.eps1)
    }
}

impl Default for LorenzParams {
    /// `ε₂ = 1` and `ε₁ = 2⁻¹⁰`, so `ℓ` sits just below its supremum 4.
    fn default() -> Self {
        Self {
            eps1: 1.0 / 1024.0,
            eps2: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub a_d: GridOperator,
    pub a_dstar: GridOperator,
    pub a_plus: GridOperator,
    /// `A_a⁻`, kept for the sparsity check
    pub a_minus: GridOperator,
    pub a_z: GridOperator,
    pub a_s: GridOperator,
    pub params: LorenzParams,
}

/// Splits a nonpositive entry into `(z, s)` with `z ≈ w·a`, both `≤ 0`, and
/// `z + s == a` exactly in floating point (the subtraction is exact by
/// Sterbenz's lemma in both branches).
fn split_entry(a: f64, w: f64) -> (f64, f64) {
    if w >= 0.5 {
        let z = w * a;
        (z, a - z)
    } else {
        let s = a - w * a;
        (a - s, s)
    }
}

/// Builds the decomposition of `a`, which must be the operator assembled on `mesh`.
pub fn decompose(mesh: &TensorMesh, a: &GridOperator, params: LorenzParams) -> Result<Decomposition> {
    let shape = GridShape::of(mesh);
    if a.shape() != shape {
        return Err(Error::DimensionMismatch { expected: shape.dim(), got: a.dim() });
    }
    let parts = operator::split(a);
    let n = shape.dim();
    let mut zb = SparseBuilder::new(n);
    let mut sb = SparseBuilder::new(n);
    let mut dstar = parts.diag.matrix().diagonal();

    for (r, ds) in dstar.iter_mut().enumerate() {
        let (i, j) = shape.unflatten(r);
        for (c, v) in parts.minus.matrix().row(r) {
            let (ci, cj) = shape.unflatten(c);
            let w = if cj == j && ci.abs_diff(i) == 1 {
                if i % 2 == 1 { params.eps1 } else { params.eps2 }
            } else if ci == i && cj.abs_diff(j) == 1 {
                if j % 2 == 1 { params.eps1 } else { params.eps2 }
            } else {
                return Err(invalid(format!(
                    "negative coupling ({i},{j})->({ci},{cj}) is not a nearest neighbour; operator does not match mesh"
                )));
            };
            let (z, s) = split_entry(v, w);
            zb.push(c, z);
            sb.push(c, s);
        }
        zb.finish_row();
        sb.finish_row();

        if mesh.classify_unchecked(i, j) == PointClass::Knot {
            let h = mesh.half_widths(i, j)?;
            let pa = h.h_a * h.h_a1;
            let pb = h.h_b * h.h_b1;
            *ds = (8.0 * pb + 8.0 * pa) / (2.0 * pa * pb);
        }
    }

    Ok(Decomposition {
        a_d: parts.diag,
        a_dstar: GridOperator::new(shape, SparseMatrix::from_diagonal(&dstar))?,
        a_plus: parts.plus,
        a_minus: parts.minus,
        a_z: GridOperator::new(shape, zb.build())?,
        a_s: GridOperator::new(shape, sb.build())?,
        params,
    })
}

/// Outcome of one hypothesis check. `row`/`col` locate the worst entry when
/// that is meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub pass: bool,
    pub worst_value: Option<f64>,
    pub row: Option<usize>,
    pub col: Option<usize>,
}

impl HypothesisCheck {
    fn flag(pass: bool) -> Self {
        Self {
            pass,
            worst_value: None,
            row: None,
            col: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateReport {
    pub row_condition: HypothesisCheck,
    pub product_condition: HypothesisCheck,
    pub sparsity_condition: HypothesisCheck,
    pub connectivity_condition: HypothesisCheck,
    pub overall: HypothesisCheck,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.overall.pass
    }
}

fn row_condition_of(diag: &SparseMatrix, a_z: &SparseMatrix) -> Result<HypothesisCheck> {
    let b = diag.add(a_z)?;
    let d = diag.diagonal();
    let sums = b.row_sums();
    let mut worst = (f64::INFINITY, 0);
    let mut all_nonneg = true;
    let mut any_pos = false;
    for (r, (&s, &dr)) in sums.iter().zip(&d).enumerate() {
        let tol = SIGN_TOL * dr.abs();
        all_nonneg &= s >= -tol;
        any_pos |= s > tol;
        if s < worst.0 {
            worst = (s, r);
        }
    }
    Ok(HypothesisCheck {
        pass: all_nonneg && any_pos,
        worst_value: Some(worst.0),
        row: Some(worst.1),
        col: None,
    })
}

/// Row sums of `A_{d*} + A^z`: all nonnegative, at least one positive.
pub fn check_row_condition(dec: &Decomposition) -> Result<HypothesisCheck> {
    row_condition_of(dec.a_dstar.matrix(), dec.a_z.matrix())
}

/// Same test on `A_d + A^z` (the unrelaxed condition).
pub fn check_row_condition_strict(mesh: &TensorMesh, a: &GridOperator, params: LorenzParams) -> Result<HypothesisCheck> {
    let dec = decompose(mesh, a, params)?;
    row_condition_of(dec.a_d.matrix(), dec.a_z.matrix())
}

/// `A_a⁺ ≤ A^z A_{d*}⁻¹ A^s` at every positive entry of `A_a⁺`, to
/// `1e-12·max diag(A_d)`. Reports the largest `A_a⁺ − P` and where it occurs.
pub fn check_product_condition(dec: &Decomposition) -> Result<HypothesisCheck> {
    let dstar = dec.a_dstar.matrix().diagonal();
    if let Some(r) = dstar.iter().position(|&d| d <= 0.0) {
        return Err(Error::Internal(format!("nonpositive relaxed diagonal at row {r}")));
    }
    let inv: Vec<f64> = dstar.iter().map(|d| 1.0 / d).collect();
    let p = dec.a_z.matrix().mul_diag_mul(&inv, dec.a_s.matrix())?;
    let scale = dec.a_d.matrix().diagonal().into_iter().fold(0.0, f64::max);

    let mut worst: Option<(f64, usize, usize)> = None;
    for (r, c, v) in dec.a_plus.matrix().triplets() {
        let gap = v - p.get(r, c);
        if worst.is_none_or(|(w, _, _)| gap > w) {
            worst = Some((gap, r, c));
        }
    }
    Ok(match worst {
        None => HypothesisCheck::flag(true),
        Some((w, r, c)) => HypothesisCheck {
            pass: w <= SIGN_TOL * scale,
            worst_value: Some(w),
            row: Some(r),
            col: Some(c),
        },
    })
}

/// Vertices of `N⁰(A·e)` with no directed path in `m` to `N⁺(A·e)`.
pub fn disconnected_vertices(m: &SparseMatrix, a: &SparseMatrix, e: &[f64]) -> Result<Vec<usize>> {
    let n = a.dim();
    if m.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.dim() });
    }
    if e.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: e.len() });
    }
    if e.iter().any(|&v| v < 0.0) || e.iter().all(|&v| v == 0.0) {
        return Err(invalid("connectivity needs e >= 0 and e != 0"));
    }
    let ae = a.matvec(e)?;
    let scale = a.max_abs() * e.iter().fold(0.0_f64, |x, v| x.max(v.abs()));
    let thr = SIGN_TOL * scale;
    if let Some(k) = ae.iter().position(|&v| v < -thr) {
        return Err(invalid(format!("(A e)_{k} = {} is negative", ae[k])));
    }

    // reverse reachability from N⁺ along edges p -> q with m_pq != 0
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (p, q, _) in m.triplets() {
        if p != q {
            preds[q].push(p);
        }
    }
    let mut reached = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&k| ae[k] > thr).collect();
    for &k in &queue {
        reached[k] = true;
    }
    while let Some(q) = queue.pop_front() {
        for &p in &preds[q] {
            if !reached[p] {
                reached[p] = true;
                queue.push_back(p);
            }
        }
    }
    Ok((0..n).filter(|&k| !reached[k]).collect())
}

/// Whether `m` connects `N⁰(A·e)` with `N⁺(A·e)`; vacuously true when
/// `N⁰` is empty.
pub fn check_connectivity(m: &GridOperator, a: &GridOperator, e: &GridVector) -> Result<bool> {
    Ok(disconnected_vertices(m.matrix(), a.matrix(), e.values())?.is_empty())
}

fn connectivity_of(dec: &Decomposition, a: &GridOperator) -> Result<HypothesisCheck> {
    let ones = vec![1.0; a.dim()];
    let via_z = disconnected_vertices(dec.a_z.matrix(), a.matrix(), &ones)?;
    if via_z.is_empty() {
        return Ok(HypothesisCheck::flag(true));
    }
    let via_s = disconnected_vertices(dec.a_s.matrix(), a.matrix(), &ones)?;
    if via_s.is_empty() {
        return Ok(HypothesisCheck::flag(true));
    }
    Ok(HypothesisCheck {
        pass: false,
        worst_value: Some(via_z.len().min(via_s.len()) as f64),
        row: Some(via_z[0]),
        col: None,
    })
}

fn sparsity_of(dec: &Decomposition) -> HypothesisCheck {
    let target = dec.a_minus.matrix();
    let pass = dec.a_z.matrix().same_pattern(target) || dec.a_s.matrix().same_pattern(target);
    HypothesisCheck::flag(pass)
}

/// Runs every hypothesis on an already decomposed operator, with `e = 1`.
pub fn certify_decomposition(a: &GridOperator, dec: &Decomposition) -> Result<CertificateReport> {
    let row_condition = check_row_condition(dec)?;
    let product_condition = check_product_condition(dec)?;
    let sparsity_condition = sparsity_of(dec);
    let connectivity_condition = connectivity_of(dec, a)?;
    let overall = HypothesisCheck::flag(
        row_condition.pass && product_condition.pass && sparsity_condition.pass && connectivity_condition.pass,
    );
    Ok(CertificateReport {
        row_condition,
        product_condition,
        sparsity_condition,
        connectivity_condition,
        overall,
    })
}

pub fn certify(mesh: &TensorMesh, params: LorenzParams) -> Result<CertificateReport> {
    let a = assemble(mesh);
    let dec = decompose(mesh, &a, params)?;
    certify_decomposition(&a, &dec)
}
