//! Dirichlet Poisson solves on the assembled operator and ℓ∞ convergence studies.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::LuFactorization;
use crate::mesh::TensorMesh;
use crate::operator::{assemble, GridVector};

pub type Field = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// `−Δu = f` in the domain, `u = g` on its boundary.
pub struct PoissonProblem {
    pub f: Field,
    pub g: Field,
    pub exact: Option<Field>,
}

impl fmt::Debug for PoissonProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PoissonProblem")
            .field("exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

impl PoissonProblem {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static, g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Box::new(f),
            g: Box::new(g),
            exact: None,
        }
    }

    /// Problem with a known solution; the boundary data is `u` itself.
    pub fn manufactured<U>(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static, u: U) -> Self
    where
        U: Fn(f64, f64) -> f64 + Send + Sync + Clone + 'static,
    {
        Self {
            f: Box::new(f),
            g: Box::new(u.clone()),
            exact: Some(Box::new(u)),
        }
    }

    /// Largest `|g − exact|` over the boundary grid points of `mesh`, or `None`
    /// when there is no exact solution.
    pub fn boundary_mismatch(&self, mesh: &TensorMesh) -> Option<f64> {
        let exact = self.exact.as_ref()?;
        let mut worst = 0.0_f64;
        for j in 0..mesh.n_y() + 2 {
            for i in 0..mesh.n_x() + 2 {
                if mesh.is_boundary(i, j) {
                    let (x, y) = (mesh.x(i), mesh.y(j));
                    worst = worst.max(((self.g)(x, y) - exact(x, y)).abs());
                }
            }
        }
        Some(worst)
    }

    /// The three manufactured benchmarks on the unit square.
    pub fn benchmark(test: u8) -> Result<Self> {
        Ok(match test {
            1 => Self::manufactured(
                |_, _| 0.0,
                |x: f64, y: f64| ((x + 1.0).powi(2) + (y + 1.0).powi(2)).ln() + y.sin() * x.exp(),
            ),
            2 => Self::manufactured(
                |x: f64, y: f64| {
                    13.0 * PI * PI * (3.0 * PI * y).sin() * (2.0 * PI * x).sin()
                        + 2.0 * y * (1.0 - y)
                        + 2.0 * x * (1.0 - x)
                },
                |x: f64, y: f64| (3.0 * PI * y).sin() * (2.0 * PI * x).sin() + x * y * (1.0 - x) * (1.0 - y),
            ),
            3 => Self::manufactured(
                |x: f64, y: f64| 74.0 * PI * PI * (5.0 * PI * x).cos() * (7.0 * PI * y).cos() - 4.0,
                |x: f64, y: f64| (5.0 * PI * x).cos() * (7.0 * PI * y).cos() + x * x + y * y,
            ),
            _ => return Err(Error::OutOfRange(format!("benchmark must be 1, 2 or 3, got {test}"))),
        })
    }
}

/// Solves `L̄_h u = rhs` with `f` at interior points and `g` on the boundary.
pub fn solve_dirichlet(mesh: &TensorMesh, prob: &PoissonProblem) -> Result<GridVector> {
    let a = assemble(mesh);
    let shape = a.shape();
    let rhs: Vec<f64> = (0..shape.dim())
        .map(|k| {
            let (i, j) = shape.unflatten(k);
            let (x, y) = (mesh.x(i), mesh.y(j));
            if shape.is_boundary(k) { (prob.g)(x, y) } else { (prob.f)(x, y) }
        })
        .collect();
    let lu = LuFactorization::new(&a.matrix().to_dense())?;
    let u = lu.solve(&rhs)?;

    let r = a.matrix().matvec(&u)?;
    let res = r.iter().zip(&rhs).fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
    let scale = rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if res > 1e-9 * scale {
        return Err(Error::Internal(format!("solve residual {res:e} exceeds 1e-9 * {scale:e}")));
    }
    GridVector::new(shape, u)
}

/// `max |u − exact|` over every grid point, boundary included.
pub fn linf_error(u: &GridVector, exact: impl Fn(f64, f64) -> f64, mesh: &TensorMesh) -> Result<f64> {
    let reference = GridVector::sample(mesh, exact);
    if reference.shape() != u.shape() {
        return Err(Error::DimensionMismatch { expected: reference.values().len(), got: u.values().len() });
    }
    Ok(u
        .values()
        .iter()
        .zip(reference.values())
        .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    /// Interior points per axis.
    pub interior: usize,
    pub linf_error: f64,
    /// `log₂(e_prev / e)`; absent on the first row.
    pub order: Option<f64>,
}

impl ConvergenceRow {
    pub fn grid_label(&self) -> String {
        format!("{0}x{0}", self.interior)
    }
}

/// Geometric meshes with `(n+1)/2` cells per axis for each interior size `n`.
/// Sizes must be odd and follow `n → 2n + 1`.
pub fn convergence_study(prob: &PoissonProblem, interior_sizes: &[usize], ratio: f64) -> Result<Vec<ConvergenceRow>> {
    let exact = prob.exact.as_ref().ok_or_else(|| invalid("a convergence study needs an exact solution"))?;
    if interior_sizes.is_empty() {
        return Err(invalid("no grid sizes given"));
    }
    if let Some(n) = interior_sizes.iter().find(|&&n| n % 2 == 0) {
        return Err(invalid(format!("interior sizes must be odd, got {n}")));
    }
    if let Some(w) = interior_sizes.windows(2).find(|w| w[1] != 2 * w[0] + 1) {
        return Err(invalid(format!("sizes must double as n -> 2n+1, got {} then {}", w[0], w[1])));
    }

    let errors: Vec<f64> = interior_sizes
        .par_iter()
        .map(|&n| {
            let mesh = TensorMesh::geometric(n.div_ceil(2), ratio)?;
            let u = solve_dirichlet(&mesh, prob)?;
            linf_error(&u, exact, &mesh)
        })
        .collect::<Result<_>>()?;

    Ok(interior_sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| ConvergenceRow {
            interior: n,
            linf_error: errors[k],
            order: (k > 0).then(|| (errors[k - 1] / errors[k]).log2()),
        })
        .collect())
}

/// CSV with header `grid,linf_error,order`. Errors carry three significant
/// digits and orders two decimals unless `full_precision` is set.
pub fn convergence_csv(rows: &[ConvergenceRow], full_precision: bool) -> String {
    let mut out = String::from("grid,linf_error,order\n");
    for r in rows {
        let err = if full_precision { format!("{:e}", r.linf_error) } else { format!("{:.2e}", r.linf_error) };
        let order = match r.order {
            None => "-".to_string(),
            Some(o) if full_precision => format!("{o}"),
            Some(o) => format!("{o:.2}"),
        };
        out.push_str(&format!("{},{err},{order}\n", r.grid_label()));
    }
    out
}
