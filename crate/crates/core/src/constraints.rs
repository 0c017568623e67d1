//! Explicit mesh constraints that imply the certificate's product condition.
//!
//! Every check runs over the interior knots. At a knot the two x half widths
//! `(h_{a-1}, h_a)` and the two y half widths `(h_{b-1}, h_b)` come from the four
//! adjacent cells, and each inequality is tested in both axis orders. A slack
//! is reported as `1 − rhs/lhs`, so it is negative exactly when the inequality
//! fails and is independent of the mesh scale.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::TensorMesh;

/// Tolerance on `worst_margin` for a pass.
pub const MARGIN_TOL: f64 = 1e-12;

/// Bound on max/min half width, across both axes, that implies the main constraints.
pub const GLOBAL_RATIO_BOUND: f64 = 32.0 / 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    ProductX,
    ProductY,
    MinMaxX,
    MinMaxY,
    GlobalRatio,
}

impl Inequality {
    pub fn name(self) -> &'static str {
        match self {
            Inequality::ProductX => "product_x",
            Inequality::ProductY => "product_y",
            Inequality::MinMaxX => "min_max_x",
            Inequality::MinMaxY => "min_max_y",
            Inequality::GlobalRatio => "global_ratio",
        }
    }
}

/// Knot indices (`kx = i/2`, `ky = j/2`) of the worst block, absent for the
/// global ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintLocation {
    pub kx: Option<usize>,
    pub ky: Option<usize>,
    pub inequality: Inequality,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub pass: bool,
    /// `+∞` when there is nothing to check (serialized as `null`).
    pub worst_margin: f64,
    pub location: Option<ConstraintLocation>,
}

impl ConstraintReport {
    fn vacuous() -> Self {
        Self {
            pass: true,
            worst_margin: f64::INFINITY,
            location: None,
        }
    }

    fn from_worst(worst: Option<(f64, ConstraintLocation)>) -> Self {
        match worst {
            None => Self::vacuous(),
            Some((margin, loc)) => Self {
                pass: margin >= -MARGIN_TOL,
                worst_margin: margin,
                location: Some(loc),
            },
        }
    }
}

struct Constants {
    product: f64,
    min_max: Option<f64>,
}

fn check_blocks(mesh: &TensorMesh, k: Constants) -> ConstraintReport {
    let (wx, wy) = (mesh.px().widths(), mesh.py().widths());
    let mut worst: Option<(f64, ConstraintLocation)> = None;
    let mut consider = |lhs: f64, rhs: f64, kx: usize, ky: usize, inequality: Inequality| {
        let margin = 1.0 - rhs / lhs;
        if worst.is_none_or(|(w, _)| margin < w) {
            worst = Some((margin, ConstraintLocation { kx: Some(kx), ky: Some(ky), inequality }));
        }
    };

    for ky in 1..wy.len() {
        let (b1, b) = (0.5 * wy[ky - 1], 0.5 * wy[ky]);
        for kx in 1..wx.len() {
            let (a1, a) = (0.5 * wx[kx - 1], 0.5 * wx[kx]);
            let (amax, bmax) = (a.max(a1), b.max(b1));
            consider(a * a1, k.product * bmax * bmax, kx, ky, Inequality::ProductX);
            consider(b * b1, k.product * amax * amax, kx, ky, Inequality::ProductY);
            if let Some(d) = k.min_max {
                consider(a.min(a1), d * bmax, kx, ky, Inequality::MinMaxX);
                consider(b.min(b1), d * amax, kx, ky, Inequality::MinMaxY);
            }
        }
    }
    ConstraintReport::from_worst(worst)
}

/// `h_a h_{a-1} ≥ 7/(4ℓ−4)·max(h_b², h_{b-1}²)` and
/// `min(h_a, h_{a-1}) ≥ √(1/(ℓ−1))·max(h_b, h_{b-1})`, plus the same with the
/// axes swapped, for `1 < ℓ ≤ 4`.
pub fn check_local(mesh: &TensorMesh, ell: f64) -> Result<ConstraintReport> {
    if !(ell > 1.0 && ell <= 4.0) {
        return Err(Error::InvalidArgument(format!("ell must lie in (1, 4], got {ell}")));
    }
    Ok(check_blocks(
        mesh,
        Constants {
            product: 7.0 / (4.0 * ell - 4.0),
            min_max: Some((1.0 / (ell - 1.0)).sqrt()),
        },
    ))
}

/// The `ℓ = 4` constraints: constants 7/12 and √(1/3).
pub fn check_main(mesh: &TensorMesh) -> ConstraintReport {
    check_local(mesh, 4.0).expect("ell = 4 is in range")
}

/// Largest over smallest half width, both axes together, at most 32/25.
pub fn check_global_ratio(mesh: &TensorMesh) -> ConstraintReport {
    let ratio = mesh.global_half_width_ratio();
    let loc = ConstraintLocation {
        kx: None,
        ky: None,
        inequality: Inequality::GlobalRatio,
    };
    ConstraintReport::from_worst(Some((1.0 - ratio / GLOBAL_RATIO_BOUND, loc)))
}

/// Product constraints with constant 1/2 (the classical bilinear-element condition).
pub fn check_q1(mesh: &TensorMesh) -> ConstraintReport {
    check_blocks(mesh, Constants { product: 0.5, min_max: None })
}
