#![allow(dead_code)]

use q2mono::{CellPartition1D, Interval, TensorMesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cell widths with `log w` uniform in `[0, ln max_ratio]`, so any two widths
/// differ by at most `max_ratio`.
pub fn log_uniform_widths(rng: &mut impl Rng, cells: usize, max_ratio: f64) -> Vec<f64> {
    (0..cells).map(|_| (rng.gen::<f64>() * max_ratio.ln()).exp()).collect()
}

/// Partition of `[0, 1]` with widths proportional to `w`.
pub fn unit_partition(w: Vec<f64>) -> CellPartition1D {
    let total: f64 = w.iter().sum();
    let scaled = w.into_iter().map(|v| v / total).collect();
    CellPartition1D::with_domain(scaled, Interval::unit()).unwrap()
}

pub fn random_mesh(rng: &mut impl Rng, max_cells: usize, max_ratio: f64) -> TensorMesh {
    let mx = rng.gen_range(2..=max_cells);
    let my = rng.gen_range(2..=max_cells);
    // both axes draw from [1, max_ratio], so the bound holds jointly
    let wx = log_uniform_widths(rng, mx, max_ratio);
    let wy = log_uniform_widths(rng, my, max_ratio);
    TensorMesh::new(unit_partition(wx), unit_partition(wy))
}

/// Labelled test meshes: uniform, geometric r ∈ [1, 1.3], five-cell stretch
/// r ∈ [1, 6], and seeded random meshes inside and outside the 32/25 bound.
pub fn corpus() -> Vec<(String, TensorMesh)> {
    let mut out = Vec::new();
    for m in 1..=6 {
        out.push((format!("uniform {m}"), TensorMesh::uniform(m).unwrap()));
    }
    for m in [2, 4, 6] {
        for r in [1.0, 1.05, 1.1, 1.2, 1.3] {
            out.push((format!("geometric {m}:{r}"), TensorMesh::geometric(m, r).unwrap()));
        }
    }
    for k in 0..=10 {
        let r = 1.0 + 0.5 * k as f64;
        out.push((format!("stretch5 {r}"), TensorMesh::stretch5(r).unwrap()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for k in 0..10 {
        out.push((format!("random within {k}"), random_mesh(&mut rng, 6, 1.25)));
    }
    for k in 0..10 {
        out.push((format!("random wide {k}"), random_mesh(&mut rng, 6, 4.0)));
    }
    out
}

pub fn has_interior_knot(mesh: &TensorMesh) -> bool {
    mesh.px().cells() > 1 && mesh.py().cells() > 1
}

/// `(u, −Δu)` for the quadratic polynomials the scheme reproduces exactly.
pub type Quadratic = (&'static str, fn(f64, f64) -> f64, f64);

pub fn quadratics() -> Vec<Quadratic> {
    vec![
        ("1", |_, _| 1.0, 0.0),
        ("x", |x, _| x, 0.0),
        ("y", |_, y| y, 0.0),
        ("xy", |x, y| x * y, 0.0),
        ("x^2", |x, _| x * x, -2.0),
        ("y^2", |_, y| y * y, -2.0),
    ]
}
