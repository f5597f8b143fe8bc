//! Uniform tensor-product grids and cell-average storage.
//!
//! Face index `i` of an axis sits at `min + i * delta` for `i = 0..=n`; cell
//! `i` spans faces `i` and `i + 1`. Every module uses this convention.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::floor;
use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

/// Ghost extension rule at the edge of an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    /// Modular wrap.
    Periodic,
    /// Ghost cells hold zero.
    Zero,
}

/// Minimum number of cells per axis.
pub const MIN_CELLS: usize = 4;

/// Default Gauss–Legendre points per axis used for initial cell averages.
pub const DEFAULT_QUADRATURE: usize = 4;

/// One uniform axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
    pub delta: f64,
    pub bc: BoundaryKind,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize, bc: BoundaryKind) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || max <= min {
            return Err(Error::InvalidGrid("axis bounds must satisfy min < max"));
        }
        if n < MIN_CELLS {
            return Err(Error::InvalidGrid("each axis needs at least 4 cells"));
        }
        Ok(Self { min, max, n, delta: (max - min) / n as f64, bc })
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.max - self.min
    }

    #[inline]
    pub fn face(&self, i: isize) -> f64 {
        self.min + i as f64 * self.delta
    }

    #[inline]
    pub fn center(&self, i: isize) -> f64 {
        self.min + (i as f64 + 0.5) * self.delta
    }

    /// Maps an unbounded cell index onto storage, or `None` for a zero ghost.
    #[inline]
    pub fn wrap(&self, i: isize) -> Option<usize> {
        let n = self.n as isize;
        match self.bc {
            BoundaryKind::Periodic => Some(i.rem_euclid(n) as usize),
            BoundaryKind::Zero => (0..n).contains(&i).then_some(i as usize),
        }
    }

    /// Cell index and local coordinate `s ∈ [0, 1)` of position `x`.
    #[inline]
    pub fn locate(&self, x: f64) -> (isize, f64) {
        let t = (x - self.min) / self.delta;
        let j = floor(t);
        (j as isize, t - j)
    }

    /// Positions of all `n + 1` faces.
    pub fn faces(&self) -> Vec<f64> {
        (0..=self.n as isize).map(|i| self.face(i)).collect()
    }
}

/// Uniform 2D grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub x: Axis,
    pub y: Axis,
}

impl Grid2D {
    pub fn new(
        x_range: (f64, f64),
        nx: usize,
        y_range: (f64, f64),
        ny: usize,
        bc_x: BoundaryKind,
        bc_y: BoundaryKind,
    ) -> Result<Self> {
        Ok(Self { x: Axis::new(x_range.0, x_range.1, nx, bc_x)?, y: Axis::new(y_range.0, y_range.1, ny, bc_y)? })
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.x.n
    }
    #[inline]
    pub fn ny(&self) -> usize {
        self.y.n
    }
    #[inline]
    pub fn dx(&self) -> f64 {
        self.x.delta
    }
    #[inline]
    pub fn dy(&self) -> f64 {
        self.y.delta
    }
    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.x.delta * self.y.delta
    }
    #[inline]
    pub fn len(&self) -> usize {
        self.x.n * self.y.n
    }
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major storage index: `x` varies fastest.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.x.n + i
    }

    pub fn is_periodic(&self) -> bool {
        self.x.bc == BoundaryKind::Periodic && self.y.bc == BoundaryKind::Periodic
    }
}

/// Cell averages `f̄_ij` on a grid at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    pub grid: Grid2D,
    pub values: Vec<f64>,
    pub time: f64,
}

impl CellField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self { grid, values: vec![0.0; grid.len()], time: 0.0 }
    }

    pub fn from_values(grid: Grid2D, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, values, time })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// Value with ghost extension on both axes.
    #[inline]
    pub fn get_ghost(&self, i: isize, j: isize) -> f64 {
        match (self.grid.x.wrap(i), self.grid.y.wrap(j)) {
            (Some(a), Some(b)) => self.values[self.grid.idx(a, b)],
            _ => 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Σ f̄ ΔxΔy`, summed left to right.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }
}

/// Cell averages of a pointwise density by tensor Gauss–Legendre quadrature
/// with `q` points per axis.
pub fn init_cell_averages<F>(grid: Grid2D, density: F, q: usize) -> CellField
where
    F: Fn(f64, f64) -> f64,
{
    let rule = gauss_legendre(q.max(1));
    let (hx, hy) = (0.5 * grid.dx(), 0.5 * grid.dy());
    let mut values = Vec::with_capacity(grid.len());
    for j in 0..grid.ny() {
        let yc = grid.y.center(j as isize);
        for i in 0..grid.nx() {
            let xc = grid.x.center(i as isize);
            let mut acc = 0.0;
            for &(ny, wy) in &rule {
                let y = yc + hy * ny;
                let mut row = 0.0;
                for &(nx, wx) in &rule {
                    row += wx * density(xc + hx * nx, y);
                }
                acc += wy * row;
            }
            values.push(0.25 * acc);
        }
    }
    CellField { grid, values, time: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn scenario_grids() {
        let g = Grid2D::new((-PI, PI), 40, (-PI, PI), 40, BoundaryKind::Zero, BoundaryKind::Zero).unwrap();
        assert_eq!(g.dx(), 2.0 * PI / 40.0);
        assert_eq!(g.dy(), 2.0 * PI / 40.0);

        let g = Grid2D::new((0.0, 16.0), 128, (0.0, 8.0), 64, BoundaryKind::Periodic, BoundaryKind::Periodic).unwrap();
        assert_eq!(g.dx(), 0.125);
        assert_eq!(g.dy(), 0.125);
    }

    #[test]
    fn unit_grid_faces() {
        let a = Axis::new(0.0, 1.0, 4, BoundaryKind::Periodic).unwrap();
        assert_eq!(a.delta, 0.25);
        assert_eq!(a.faces(), [0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(Axis::new(1.0, 0.0, 8, BoundaryKind::Zero).is_err());
        assert!(Axis::new(0.0, 1.0, 3, BoundaryKind::Zero).is_err());
        assert!(Axis::new(0.0, f64::NAN, 8, BoundaryKind::Zero).is_err());
    }

    #[test]
    fn ghost_extension() {
        let g = Grid2D::new((0.0, 1.0), 4, (0.0, 1.0), 5, BoundaryKind::Periodic, BoundaryKind::Zero).unwrap();
        let values = (0..20).map(|k| k as f64 + 0.5).collect();
        let f = CellField::from_values(g, values, 0.0).unwrap();
        for j in 0..5 {
            assert_eq!(f.get_ghost(-1, j), f.get(3, j as usize));
            assert_eq!(f.get_ghost(4, j), f.get(0, j as usize));
            assert_eq!(f.get_ghost(-9, j), f.get(3, j as usize));
        }
        assert_eq!(f.get_ghost(1, -1), 0.0);
        assert_eq!(f.get_ghost(1, 5), 0.0);
    }

    #[test]
    fn constant_and_linear_averages() {
        let g = Grid2D::new((0.0, 1.0), 4, (0.0, 1.0), 4, BoundaryKind::Zero, BoundaryKind::Zero).unwrap();
        let f = init_cell_averages(g, |_, _| 2.5, 4);
        assert!(f.values.iter().all(|&v| (v - 2.5).abs() < 1e-14));
        for q in 1..5 {
            let f = init_cell_averages(g, |x, _| x, q);
            for j in 0..4 {
                for i in 0..4 {
                    let mid = g.x.center(i as isize);
                    assert!((f.get(i, j) - mid).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn polynomial_exactness_per_axis() {
        // degree 2q-1 = 7 in x times degree 3 in y with q = 4
        let g = Grid2D::new((0.0, 1.0), 5, (0.0, 2.0), 4, BoundaryKind::Zero, BoundaryKind::Zero).unwrap();
        let f = init_cell_averages(g, |x, y| libm::pow(x, 7.0) * y * y * y, 4);
        for j in 0..4 {
            for i in 0..5 {
                let (x0, x1) = (g.x.face(i as isize), g.x.face(i as isize + 1));
                let (y0, y1) = (g.y.face(j as isize), g.y.face(j as isize + 1));
                let exact = (libm::pow(x1, 8.0) - libm::pow(x0, 8.0)) / 8.0 * (libm::pow(y1, 4.0) - libm::pow(y0, 4.0))
                    / 4.0
                    / g.cell_area();
                assert!((f.get(i, j) - exact).abs() < 1e-13 * exact.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn locate_round_trips_centers() {
        let a = Axis::new(-1.0, 1.0, 10, BoundaryKind::Zero).unwrap();
        for i in -3..13 {
            let (j, s) = a.locate(a.center(i));
            assert_eq!(j, i);
            assert!((s - 0.5).abs() < 1e-12);
        }
    }
}
