//! Quasi-uniform tensor-product meshes and Gauss–Lobatto point classification.
//!
//! A [`CellPartition1D`] with `m` cells induces `2m + 1` grid coordinates: the
//! cell boundaries at even indices and the cell midpoints at odd indices. A
//! [`TensorMesh`] pairs an x and a y partition; its interior grid has
//! `n_x = 2 m_x - 1` points per row.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Closed interval `[left, right]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub left: f64,
    pub right: f64,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if !(left.is_finite() && right.is_finite() && right > left) {
            return Err(invalid(format!("empty or non-finite interval [{left}, {right}]")));
        }
        Ok(Self { left, right })
    }

    pub fn unit() -> Self {
        Self { left: 0.0, right: 1.0 }
    }

    pub fn length(&self) -> f64 {
        self.right - self.left
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Ordered cell widths partitioning an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CellPartition1D {
    widths: Vec<f64>,
    domain: Interval,
    coords: Vec<f64>,
}

impl CellPartition1D {
    /// Partition of `[left, left + sum(widths)]`.
    pub fn from_widths(widths: Vec<f64>, left: f64) -> Result<Self> {
        check_widths(&widths)?;
        let right = left + compensated_sum(widths.iter().copied());
        Self::build(widths, Interval::new(left, right)?)
    }

    /// Partition of `domain`; the widths must fill it to 1e-14 relative.
    pub fn with_domain(widths: Vec<f64>, domain: Interval) -> Result<Self> {
        check_widths(&widths)?;
        let total = compensated_sum(widths.iter().copied());
        if (total - domain.length()).abs() > 1e-14 * domain.length() {
            return Err(invalid(format!(
                "widths sum to {total}, domain length is {}",
                domain.length()
            )));
        }
        Self::build(widths, domain)
    }

    fn build(widths: Vec<f64>, domain: Interval) -> Result<Self> {
        let mut coords = Vec::with_capacity(2 * widths.len() + 1);
        coords.push(domain.left);
        let mut sum = 0.0_f64;
        let mut comp = 0.0_f64;
        for &w in &widths {
            let knot = domain.left + sum + comp;
            coords.push(knot + 0.5 * w);
            let t = sum + w;
            if sum.abs() >= w.abs() {
                comp += (sum - t) + w;
            } else {
                comp += (w - t) + sum;
            }
            sum = t;
            coords.push(domain.left + sum + comp);
        }
        // pin the right endpoint against accumulated rounding
        *coords.last_mut().expect("at least one cell") = domain.right;
        if coords.windows(2).any(|p| p[1] <= p[0]) {
            return Err(invalid("grid coordinates are not strictly increasing"));
        }
        Ok(Self { widths, domain, coords })
    }

    /// `m` equal cells.
    pub fn uniform(m_cells: usize, domain: Interval) -> Result<Self> {
        if m_cells == 0 {
            return Err(invalid("a partition needs at least one cell"));
        }
        let w = domain.length() / m_cells as f64;
        Self::with_domain(vec![w; m_cells], domain)
    }

    /// Cells growing left to right with `w_k / w_{k-1} = ratio`, scaled to fill `domain`.
    pub fn geometric(m_cells: usize, ratio: f64, domain: Interval) -> Result<Self> {
        if m_cells == 0 {
            return Err(invalid("a partition needs at least one cell"));
        }
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(invalid(format!("geometric ratio must be positive, got {ratio}")));
        }
        let powers: Vec<f64> = (0..m_cells).map(|k| ratio.powi(k as i32)).collect();
        let first = domain.length() / compensated_sum(powers.iter().copied());
        let widths = powers.iter().map(|p| first * p).collect();
        Self::with_domain(widths, domain)
    }

    /// Five cells `[2h, 2h, 2h', 2h, 2h]` on `[0, 1]` with `h'/h = ratio`.
    pub fn stretch5(ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio >= 1.0) {
            return Err(Error::OutOfRange(format!("stretch ratio must be >= 1, got {ratio}")));
        }
        let h = 1.0 / (8.0 + 2.0 * ratio);
        let hp = ratio * h;
        Self::with_domain(vec![2.0 * h, 2.0 * h, 2.0 * hp, 2.0 * h, 2.0 * h], Interval::unit())
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn cells(&self) -> usize {
        self.widths.len()
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// All `2m + 1` grid coordinates, boundary included.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Interior grid points along this axis, `2m - 1`.
    pub fn interior_points(&self) -> usize {
        2 * self.widths.len() - 1
    }

    /// Half widths `(left, right)` around grid index `i` (1 ≤ i ≤ 2m−1).
    /// Inside a cell both sides are that cell's half width.
    pub fn half_widths_at(&self, i: usize) -> Option<(f64, f64)> {
        if i == 0 || i >= self.coords.len() - 1 {
            return None;
        }
        if i % 2 == 1 {
            let h = 0.5 * self.widths[(i - 1) / 2];
            Some((h, h))
        } else {
            Some((0.5 * self.widths[i / 2 - 1], 0.5 * self.widths[i / 2]))
        }
    }

    pub fn min_half_width(&self) -> f64 {
        0.5 * self.widths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_half_width(&self) -> f64 {
        0.5 * self.widths.iter().copied().fold(0.0, f64::max)
    }
}

fn check_widths(widths: &[f64]) -> Result<()> {
    if widths.is_empty() {
        return Err(invalid("a partition needs at least one cell"));
    }
    if let Some(w) = widths.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(invalid(format!("cell widths must be positive and finite, got {w}")));
    }
    Ok(())
}

/// Gauss–Lobatto point type of a grid index pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointClass {
    Boundary,
    CellCenter,
    /// Midpoint of an edge parallel to the y-axis (i even, j odd).
    EdgeCenter2,
    /// Midpoint of an edge parallel to the x-axis (i odd, j even).
    EdgeCenter3,
    /// Interior cell corner.
    Knot,
}

/// Half widths around an interior point. `h_a1` is the cell to the left
/// (`h_{a-1}`), `h_a` the cell to the right; `h_b1`/`h_b` likewise below/above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalHalfWidths {
    pub h_a: f64,
    pub h_a1: f64,
    pub h_b: f64,
    pub h_b1: f64,
}

/// Tensor product of two cell partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorMesh {
    px: CellPartition1D,
    py: CellPartition1D,
}

impl TensorMesh {
    pub fn new(px: CellPartition1D, py: CellPartition1D) -> Self {
        Self { px, py }
    }

    /// Same partition on both axes.
    pub fn square(p: CellPartition1D) -> Self {
        Self { px: p.clone(), py: p }
    }

    pub fn uniform(m_cells: usize) -> Result<Self> {
        Ok(Self::square(CellPartition1D::uniform(m_cells, Interval::unit())?))
    }

    pub fn geometric(m_cells: usize, ratio: f64) -> Result<Self> {
        Ok(Self::square(CellPartition1D::geometric(m_cells, ratio, Interval::unit())?))
    }

    pub fn stretch5(ratio: f64) -> Result<Self> {
        Ok(Self::square(CellPartition1D::stretch5(ratio)?))
    }

    pub fn px(&self) -> &CellPartition1D {
        &self.px
    }

    pub fn py(&self) -> &CellPartition1D {
        &self.py
    }

    /// Interior grid points along x.
    pub fn n_x(&self) -> usize {
        self.px.interior_points()
    }

    /// Interior grid points along y.
    pub fn n_y(&self) -> usize {
        self.py.interior_points()
    }

    /// Total number of grid points, boundary included.
    pub fn num_points(&self) -> usize {
        (self.n_x() + 2) * (self.n_y() + 2)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.px.coords()[i]
    }

    pub fn y(&self, j: usize) -> f64 {
        self.py.coords()[j]
    }

    fn check_index(&self, i: usize, j: usize) -> Result<()> {
        if i > self.n_x() + 1 || j > self.n_y() + 1 {
            return Err(invalid(format!(
                "grid index ({i}, {j}) outside 0..={} x 0..={}",
                self.n_x() + 1,
                self.n_y() + 1
            )));
        }
        Ok(())
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n_x() + 1 || j == self.n_y() + 1
    }

    pub fn classify(&self, i: usize, j: usize) -> Result<PointClass> {
        self.check_index(i, j)?;
        Ok(self.classify_unchecked(i, j))
    }

    pub(crate) fn classify_unchecked(&self, i: usize, j: usize) -> PointClass {
        if self.is_boundary(i, j) {
            return PointClass::Boundary;
        }
        match (i % 2 == 1, j % 2 == 1) {
            (true, true) => PointClass::CellCenter,
            (false, false) => PointClass::Knot,
            (false, true) => PointClass::EdgeCenter2,
            (true, false) => PointClass::EdgeCenter3,
        }
    }

    pub fn half_widths(&self, i: usize, j: usize) -> Result<LocalHalfWidths> {
        self.check_index(i, j)?;
        match (self.px.half_widths_at(i), self.py.half_widths_at(j)) {
            (Some((h_a1, h_a)), Some((h_b1, h_b))) => Ok(LocalHalfWidths { h_a, h_a1, h_b, h_b1 }),
            _ => Err(invalid(format!("({i}, {j}) is a boundary point"))),
        }
    }

    /// Ratio of the largest to the smallest half width over both axes.
    pub fn global_half_width_ratio(&self) -> f64 {
        let max = self.px.max_half_width().max(self.py.max_half_width());
        let min = self.px.min_half_width().min(self.py.min_half_width());
        max / min
    }

    /// Text form: `x: w1 w2 ...` and `y: w1 w2 ...`.
    pub fn to_mesh_file(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for TensorMesh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, p) in [("x", &self.px), ("y", &self.py)] {
            write!(f, "{name}:")?;
            for w in p.widths() {
                write!(f, " {w}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for TensorMesh {
    type Err = Error;

    /// Parses the mesh file format. Each axis spans `[0, sum of widths]`.
    fn from_str(s: &str) -> Result<Self> {
        let mut x = None;
        let mut y = None;
        for (n, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: n + 1, msg };
            let (key, rest) = line
                .split_once(':')
                .ok_or_else(|| parse_err("expected `x:` or `y:`".into()))?;
            let widths = rest
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| parse_err(format!("bad width {t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let part = CellPartition1D::from_widths(widths, 0.0).map_err(|e| parse_err(e.to_string()))?;
            let slot = match key.trim() {
                "x" => &mut x,
                "y" => &mut y,
                other => return Err(parse_err(format!("unknown axis {other:?}"))),
            };
            if slot.replace(part).is_some() {
                return Err(parse_err(format!("axis {} given twice", key.trim())));
            }
        }
        match (x, y) {
            (Some(px), Some(py)) => Ok(Self::new(px, py)),
            _ => Err(Error::Parse { line: 0, msg: "mesh file needs both `x:` and `y:` lines".into() }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn uniform_partitions() {
        let p = CellPartition1D::uniform(1, Interval::unit()).unwrap();
        assert_eq!(p.widths(), &[1.0]);
        assert_eq!(p.coords(), &[0.0, 0.5, 1.0]);

        let p = CellPartition1D::uniform(2, Interval::unit()).unwrap();
        assert_eq!(p.widths(), &[0.5, 0.5]);
        assert_eq!(p.coords(), &[0.0, 0.25, 0.5, 0.75, 1.0]);

        let p = CellPartition1D::uniform(4, Interval::unit()).unwrap();
        assert_eq!(p.widths(), &[0.25; 4]);
        assert_eq!(p.coords().len(), 9);
        for (k, x) in p.coords().iter().enumerate() {
            assert!(close(*x, k as f64 / 8.0, 1e-15));
        }
        assert!(matches!(
            CellPartition1D::uniform(0, Interval::unit()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn geometric_partitions() {
        let p = CellPartition1D::geometric(2, 1.0, Interval::unit()).unwrap();
        assert_eq!(p.widths(), &[0.5, 0.5]);

        // closed form (r - 1) / (r^m - 1) against the implementation's summation
        let r: f64 = 1.01;
        let w0 = (r - 1.0) / (r.powi(4) - 1.0);
        let p = CellPartition1D::geometric(4, r, Interval::unit()).unwrap();
        for (k, w) in p.widths().iter().enumerate() {
            assert!(close(*w, w0 * r.powi(k as i32), 1e-15), "{k}: {w}");
        }
        for pair in p.widths().windows(2) {
            assert!(close(pair[1] / pair[0], r, 1e-14));
        }

        let p = CellPartition1D::geometric(3, 2.0, Interval::new(0.0, 7.0).unwrap()).unwrap();
        assert_eq!(p.widths(), &[1.0, 2.0, 4.0]);

        assert!(CellPartition1D::geometric(3, 0.0, Interval::unit()).is_err());
        assert!(CellPartition1D::geometric(3, -1.0, Interval::unit()).is_err());
    }

    #[test]
    fn stretch5_partitions() {
        let p = CellPartition1D::stretch5(1.0).unwrap();
        for w in p.widths() {
            assert!(close(*w, 0.2, 1e-15));
        }

        let p = CellPartition1D::stretch5(5.35).unwrap();
        let h = p.widths()[0] / 2.0;
        let hp = p.widths()[2] / 2.0;
        assert!(close(h, 0.0535, 1e-4) && close(hp, 0.2861, 1e-4), "h={h} h'={hp}");

        let p = CellPartition1D::stretch5(2.0).unwrap();
        let expect = [1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
        for (w, e) in p.widths().iter().zip(expect) {
            assert!(close(*w, e, 1e-15));
        }

        assert!(matches!(CellPartition1D::stretch5(0.9), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn widths_must_fill_domain() {
        assert!(CellPartition1D::with_domain(vec![0.5, 0.4], Interval::unit()).is_err());
        assert!(CellPartition1D::with_domain(vec![0.5, -0.5, 1.0], Interval::unit()).is_err());
        assert!(CellPartition1D::with_domain(vec![], Interval::unit()).is_err());
    }

    #[test]
    fn classification() {
        let mesh = TensorMesh::uniform(2).unwrap();
        assert_eq!(mesh.n_x(), 3);
        assert_eq!(mesh.num_points(), 25);
        assert_eq!(mesh.classify(1, 1).unwrap(), PointClass::CellCenter);
        assert_eq!(mesh.classify(2, 2).unwrap(), PointClass::Knot);
        assert_eq!(mesh.classify(2, 1).unwrap(), PointClass::EdgeCenter2);
        assert_eq!(mesh.classify(1, 2).unwrap(), PointClass::EdgeCenter3);
        assert_eq!(mesh.classify(0, 2).unwrap(), PointClass::Boundary);
        assert_eq!(mesh.classify(4, 4).unwrap(), PointClass::Boundary);
        assert!(mesh.classify(5, 0).is_err());
    }

    #[test]
    fn half_widths_at_points() {
        let mesh = TensorMesh::uniform(2).unwrap();
        let hw = mesh.half_widths(2, 2).unwrap();
        assert_eq!((hw.h_a1, hw.h_a), (0.25, 0.25));

        let p = CellPartition1D::from_widths(vec![0.2, 0.6], 0.0).unwrap();
        let mesh = TensorMesh::square(p);
        let hw = mesh.half_widths(2, 1).unwrap();
        assert!(close(hw.h_a1, 0.1, 1e-16) && close(hw.h_a, 0.3, 1e-16));
        assert!(close(hw.h_b1, 0.1, 1e-16) && close(hw.h_b, 0.1, 1e-16));
        let hw = mesh.half_widths(1, 3).unwrap();
        assert!(close(hw.h_a, 0.1, 1e-16) && close(hw.h_a1, 0.1, 1e-16));
        assert!(close(hw.h_b, 0.3, 1e-16) && close(hw.h_b1, 0.3, 1e-16));

        assert!(mesh.half_widths(0, 1).is_err());
        assert!(mesh.half_widths(1, 4).is_err());
    }

    #[test]
    fn mesh_file_roundtrip() {
        let text = "# two cells in x\nx: 0.25 0.75\n\ny: 0.5 0.25 0.25 # trailing\n";
        let mesh: TensorMesh = text.parse().unwrap();
        assert_eq!(mesh.px().widths(), &[0.25, 0.75]);
        assert_eq!(mesh.py().widths(), &[0.5, 0.25, 0.25]);
        assert_eq!(mesh.n_x(), 3);
        assert_eq!(mesh.n_y(), 5);
        let again: TensorMesh = mesh.to_mesh_file().parse().unwrap();
        assert_eq!(again, mesh);
    }

    #[test]
    fn mesh_file_errors() {
        assert!(matches!("x: 1\n".parse::<TensorMesh>(), Err(Error::Parse { .. })));
        assert!(matches!("x: 1\ny: 1 abc\n".parse::<TensorMesh>(), Err(Error::Parse { line: 2, .. })));
        assert!(matches!("x: 1\ny: 1 0\n".parse::<TensorMesh>(), Err(Error::Parse { line: 2, .. })));
        assert!(matches!("x: 1\nx: 1\n".parse::<TensorMesh>(), Err(Error::Parse { line: 2, .. })));
        assert!(matches!("z: 1\n".parse::<TensorMesh>(), Err(Error::Parse { line: 1, .. })));
    }
}
