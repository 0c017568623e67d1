//! Assembly of the full grid operator `L̄_h` (boundary identity rows included).
//!
//! Interior rows use the finite-difference form of the Q² scheme with the
//! local half widths of [`LocalHalfWidths`]. On a uniform mesh with spacing
//! `h` the rows reduce to the stencils (times `1/h²`):
//!
//! ```text
//! cell center      knot                edge center (2)
//!    -1                 1/4
//! -1  4 -1              -2             1/4 -2 11/2 -2 1/4   (-1 above and below)
//!    -1          1/4 -2  7 -2 1/4
//!                       -2
//!                       1/4
//! ```

use crate::error::{Error, Result};
use crate::mesh::{LocalHalfWidths, PointClass, TensorMesh};
use crate::sparse::{SparseBuilder, SparseMatrix};

/// Grid dimensions including boundary points; `flatten(i, j) = i + nx_pts·j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridShape {
    pub nx_pts: usize,
    pub ny_pts: usize,
}

impl GridShape {
    pub fn of(mesh: &TensorMesh) -> Self {
        Self {
            nx_pts: mesh.n_x() + 2,
            ny_pts: mesh.n_y() + 2,
        }
    }

    pub fn dim(&self) -> usize {
        self.nx_pts * self.ny_pts
    }

    pub fn flatten(&self, i: usize, j: usize) -> usize {
        i + self.nx_pts * j
    }

    pub fn unflatten(&self, k: usize) -> (usize, usize) {
        (k % self.nx_pts, k / self.nx_pts)
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        let (i, j) = self.unflatten(k);
        i == 0 || j == 0 || i + 1 == self.nx_pts || j + 1 == self.ny_pts
    }

    /// `true` at interior points.
    pub fn interior_mask(&self) -> Vec<bool> {
        (0..self.dim()).map(|k| !self.is_boundary(k)).collect()
    }
}

/// A square operator indexed by grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOperator {
    shape: GridShape,
    matrix: SparseMatrix,
}

impl GridOperator {
    pub fn new(shape: GridShape, matrix: SparseMatrix) -> Result<Self> {
        if matrix.dim() != shape.dim() {
            return Err(Error::DimensionMismatch { expected: shape.dim(), got: matrix.dim() });
        }
        Ok(Self { shape, matrix })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn get(&self, row: (usize, usize), col: (usize, usize)) -> f64 {
        self.matrix.get(self.shape.flatten(row.0, row.1), self.shape.flatten(col.0, col.1))
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &GridVector) -> Result<GridVector> {
        if v.shape != self.shape {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.values.len() });
        }
        Ok(GridVector {
            shape: self.shape,
            values: self.matrix.matvec(&v.values)?,
        })
    }

    pub(crate) fn map_matrix(&self, f: impl FnOnce(&SparseMatrix) -> SparseMatrix) -> Self {
        Self {
            shape: self.shape,
            matrix: f(&self.matrix),
        }
    }
}

/// One value per grid point, flattened like [`GridOperator`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridVector {
    shape: GridShape,
    values: Vec<f64>,
}

impl GridVector {
    pub fn new(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.dim() {
            return Err(Error::DimensionMismatch { expected: shape.dim(), got: values.len() });
        }
        Ok(Self { shape, values })
    }

    pub fn constant(shape: GridShape, c: f64) -> Self {
        Self { shape, values: vec![c; shape.dim()] }
    }

    /// Samples `f(x, y)` at every grid point of `mesh`.
    pub fn sample(mesh: &TensorMesh, f: impl Fn(f64, f64) -> f64) -> Self {
        let shape = GridShape::of(mesh);
        let values = (0..shape.dim())
            .map(|k| {
                let (i, j) = shape.unflatten(k);
                f(mesh.x(i), mesh.y(j))
            })
            .collect();
        Self { shape, values }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.shape.flatten(i, j)]
    }
}

/// Couplings along a knot line at offsets −2, −1, +1, +2 for half widths
/// `left` (h_{a-1}) and `right` (h_a).
fn knot_line(left: f64, right: f64) -> [f64; 4] {
    let s = left + right;
    [
        1.0 / (2.0 * left * s),
        -4.0 / (left * s),
        -4.0 / (right * s),
        1.0 / (2.0 * right * s),
    ]
}

/// Diagonal entry of an interior row.
pub(crate) fn diagonal_entry(class: PointClass, h: &LocalHalfWidths) -> f64 {
    let LocalHalfWidths { h_a, h_a1, h_b, h_b1 } = *h;
    match class {
        PointClass::Boundary => 1.0,
        PointClass::CellCenter => (2.0 * h_a * h_a + 2.0 * h_b * h_b) / (h_a * h_a * h_b * h_b),
        PointClass::EdgeCenter2 => (7.0 * h_b * h_b + 4.0 * h_a * h_a1) / (2.0 * h_a * h_a1 * h_b * h_b),
        PointClass::EdgeCenter3 => (7.0 * h_a * h_a + 4.0 * h_b * h_b1) / (2.0 * h_b * h_b1 * h_a * h_a),
        PointClass::Knot => (7.0 * h_a * h_a1 + 7.0 * h_b * h_b1) / (2.0 * h_a * h_a1 * h_b * h_b1),
    }
}

/// Assembles `L̄_h` for `mesh`. Rows are produced in flattened order.
pub fn assemble(mesh: &TensorMesh) -> GridOperator {
    let shape = GridShape::of(mesh);
    let mut b = SparseBuilder::new(shape.dim());
    for k in 0..shape.dim() {
        let (i, j) = shape.unflatten(k);
        let class = mesh.classify_unchecked(i, j);
        if class == PointClass::Boundary {
            b.push(k, 1.0);
            b.finish_row();
            continue;
        }
        let h = mesh.half_widths(i, j).expect("interior point");
        b.push(k, diagonal_entry(class, &h));

        let x_at = |di: isize| shape.flatten((i as isize + di) as usize, j);
        let y_at = |dj: isize| shape.flatten(i, (j as isize + dj) as usize);

        // x direction
        if i % 2 == 1 {
            let c = -1.0 / (h.h_a * h.h_a);
            b.push(x_at(-1), c);
            b.push(x_at(1), c);
        } else {
            let [m2, m1, p1, p2] = knot_line(h.h_a1, h.h_a);
            b.push(x_at(-2), m2);
            b.push(x_at(-1), m1);
            b.push(x_at(1), p1);
            b.push(x_at(2), p2);
        }
        // y direction
        if j % 2 == 1 {
            let c = -1.0 / (h.h_b * h.h_b);
            b.push(y_at(-1), c);
            b.push(y_at(1), c);
        } else {
            let [m2, m1, p1, p2] = knot_line(h.h_b1, h.h_b);
            b.push(y_at(-2), m2);
            b.push(y_at(-1), m1);
            b.push(y_at(1), p1);
            b.push(y_at(2), p2);
        }
        b.finish_row();
    }
    GridOperator {
        shape,
        matrix: b.build(),
    }
}

/// Diagonal, positive off-diagonal and negative off-diagonal parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub diag: GridOperator,
    pub plus: GridOperator,
    pub minus: GridOperator,
}

pub fn split(a: &GridOperator) -> Split {
    Split {
        diag: a.map_matrix(|m| m.filter(|i, j, _| i == j)),
        plus: a.map_matrix(|m| m.filter(|i, j, v| i != j && v > 0.0)),
        minus: a.map_matrix(|m| m.filter(|i, j, v| i != j && v < 0.0)),
    }
}
