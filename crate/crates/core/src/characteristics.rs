//! Backward characteristic solvers producing corner maps.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::cascade2d::CornerMap;
use crate::grid::{Axis, BoundaryKind, Grid2D};
use crate::math::{cos, sin, sqrt};
use crate::{Error, Result};

/// A velocity `a(x, y, t)` in the transport plane.
pub trait VelocityField {
    fn velocity(&self, x: f64, y: f64, t: f64) -> (f64, f64);
}

impl<F: Fn(f64, f64, f64) -> (f64, f64)> VelocityField for F {
    fn velocity(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        self(x, y, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Explicit midpoint.
    Rk2,
    /// Classical fourth order.
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryOptions {
    pub scheme: Scheme,
    pub substeps: usize,
}

impl TrajectoryOptions {
    pub fn new(scheme: Scheme, substeps: usize) -> Result<Self> {
        if substeps == 0 {
            return Err(Error::Usage("substeps must be at least 1".into()));
        }
        Ok(Self { scheme, substeps })
    }
}

/// Integrates `dX/dt = a(X, t)` backward from `t_end` to `t_end - dt`.
pub fn backtrack_point<V: VelocityField + ?Sized>(
    field: &V,
    x: f64,
    y: f64,
    t_end: f64,
    dt: f64,
    opts: TrajectoryOptions,
) -> (f64, f64) {
    let m = opts.substeps.max(1);
    let h = -dt / m as f64;
    let (mut x, mut y, mut t) = (x, y, t_end);
    for _ in 0..m {
        match opts.scheme {
            Scheme::Rk2 => {
                let (u1, v1) = field.velocity(x, y, t);
                let (u2, v2) = field.velocity(x + 0.5 * h * u1, y + 0.5 * h * v1, t + 0.5 * h);
                x += h * u2;
                y += h * v2;
            }
            Scheme::Rk4 => {
                let (u1, v1) = field.velocity(x, y, t);
                let (u2, v2) = field.velocity(x + 0.5 * h * u1, y + 0.5 * h * v1, t + 0.5 * h);
                let (u3, v3) = field.velocity(x + 0.5 * h * u2, y + 0.5 * h * v2, t + 0.5 * h);
                let (u4, v4) = field.velocity(x + h * u3, y + h * v3, t + h);
                x += h / 6.0 * (u1 + 2.0 * u2 + 2.0 * u3 + u4);
                y += h / 6.0 * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
            }
        }
        t += h;
    }
    (x, y)
}

/// Backtracks every Eulerian corner of `grid`.
pub fn backtrack<V: VelocityField + ?Sized>(grid: &Grid2D, field: &V, t_end: f64, dt: f64, opts: TrajectoryOptions) -> CornerMap {
    CornerMap::from_fn(grid, |x, y| backtrack_point(field, x, y, t_end, dt, opts))
}

/// Rigid rotation `a = (-ω y, ω x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    pub omega: f64,
}

impl Default for Rotation {
    fn default() -> Self {
        Self { omega: PI / 2.0 }
    }
}

impl VelocityField for Rotation {
    fn velocity(&self, x: f64, y: f64, _t: f64) -> (f64, f64) {
        (-self.omega * y, self.omega * x)
    }
}

impl Rotation {
    /// Exact foot of the characteristic through `(x, y)` after `dt`.
    pub fn foot(&self, x: f64, y: f64, dt: f64) -> (f64, f64) {
        let phi = -self.omega * dt;
        let (s, c) = (sin(phi), cos(phi));
        (c * x - s * y, s * x + c * y)
    }
}

/// Exact backtracking under the rotation with `ω = π/2`.
pub fn backtrack_rotation(grid: &Grid2D, dt: f64) -> CornerMap {
    let r = Rotation::default();
    CornerMap::from_fn(grid, |x, y| r.foot(x, y, dt))
}

/// Swirling deformation `a = (-2π cos²(x/2) sin y, 2π sin x cos²(y/2))·cos(πt/T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Swirling {
    pub period: f64,
}

impl Default for Swirling {
    fn default() -> Self {
        Self { period: 2.0 }
    }
}

impl Swirling {
    /// The autonomous part, without the time modulation.
    pub fn shape(x: f64, y: f64) -> (f64, f64) {
        let cx = cos(0.5 * x);
        let cy = cos(0.5 * y);
        (-2.0 * PI * cx * cx * sin(y), 2.0 * PI * sin(x) * cy * cy)
    }

    pub fn modulation(&self, t: f64) -> f64 {
        cos(PI * t / self.period)
    }

    /// `∫_0^t g`, the pseudo-time of the autonomous flow reached at `t`.
    pub fn pseudo_time(&self, t: f64) -> f64 {
        self.period / PI * sin(PI * t / self.period)
    }
}

impl VelocityField for Swirling {
    fn velocity(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let (u, v) = Self::shape(x, y);
        let g = self.modulation(t);
        (u * g, v * g)
    }
}

/// RK4 backtracking of the swirling flow from `t_next` over `dt`.
pub fn backtrack_swirling(grid: &Grid2D, t_next: f64, dt: f64, substeps: usize) -> Result<CornerMap> {
    let opts = TrajectoryOptions::new(Scheme::Rk4, substeps)?;
    Ok(backtrack(grid, &Swirling::default(), t_next, dt, opts))
}

/// Bilinear interpolation of cell-centred samples on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedVelocity {
    pub grid: Grid2D,
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
}

/// Neighbouring sample indices and weight of the right one along an axis.
#[inline]
fn bracket(axis: &Axis, x: f64) -> (usize, usize, f64) {
    let n = axis.n;
    let t = (x - axis.min) / axis.delta - 0.5;
    match axis.bc {
        BoundaryKind::Periodic => {
            let f = crate::math::floor(t);
            let w = t - f;
            let i = f as isize;
            let a = i.rem_euclid(n as isize) as usize;
            (a, (a + 1) % n, w)
        }
        BoundaryKind::Zero => {
            let t = t.clamp(0.0, (n - 1) as f64);
            let i = (crate::math::floor(t) as usize).min(n - 2);
            (i, i + 1, t - i as f64)
        }
    }
}

impl GriddedVelocity {
    pub fn new(grid: Grid2D, ux: Vec<f64>, uy: Vec<f64>) -> Result<Self> {
        if ux.len() != grid.len() || uy.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, ux, uy })
    }

    pub fn uniform(grid: Grid2D, c: (f64, f64)) -> Self {
        Self { grid, ux: alloc::vec![c.0; grid.len()], uy: alloc::vec![c.1; grid.len()] }
    }
}

impl VelocityField for GriddedVelocity {
    fn velocity(&self, x: f64, y: f64, _t: f64) -> (f64, f64) {
        let (i0, i1, wx) = bracket(&self.grid.x, x);
        let (j0, j1, wy) = bracket(&self.grid.y, y);
        let g = &self.grid;
        let mix = |a: &[f64]| {
            let lo = (1.0 - wx) * a[g.idx(i0, j0)] + wx * a[g.idx(i1, j0)];
            let hi = (1.0 - wx) * a[g.idx(i0, j1)] + wx * a[g.idx(i1, j1)];
            (1.0 - wy) * lo + wy * hi
        };
        (mix(&self.ux), mix(&self.uy))
    }
}

/// One explicit-midpoint backward step in a frozen gridded field.
pub fn backtrack_electrostatic(grid: &Grid2D, field: &GriddedVelocity, dt: f64) -> CornerMap {
    let opts = TrajectoryOptions { scheme: Scheme::Rk2, substeps: 1 };
    backtrack(grid, field, 0.0, dt, opts)
}

/// Phase-space force data of the relativistic model, sampled at the
/// spatial cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct RvmForce {
    pub axis: Axis,
    /// Longitudinal field `E_x`.
    pub ex: Vec<f64>,
    /// `a² = A_y² + A_z²`.
    pub a2: Vec<f64>,
    /// `∂_x a²`.
    pub da2: Vec<f64>,
}

impl RvmForce {
    #[inline]
    fn sample(&self, x: f64) -> (f64, f64, f64) {
        let (i0, i1, w) = bracket(&self.axis, x);
        let lerp = |a: &[f64]| (1.0 - w) * a[i0] + w * a[i1];
        (lerp(&self.ex), lerp(&self.a2), lerp(&self.da2))
    }
}

impl VelocityField for RvmForce {
    /// `(p/γ, E_x - ∂_x a² / (2γ))` with `γ = √(1 + p² + a²)`.
    fn velocity(&self, x: f64, p: f64, _t: f64) -> (f64, f64) {
        let (ex, a2, da2) = self.sample(x);
        let gamma = sqrt(1.0 + p * p + a2);
        (p / gamma, ex - 0.5 * da2 / gamma)
    }
}

/// One explicit-midpoint backward step in phase space.
pub fn backtrack_rvm(grid: &Grid2D, force: &RvmForce, dt: f64) -> Result<CornerMap> {
    let n = grid.nx();
    if force.ex.len() != n || force.a2.len() != n || force.da2.len() != n {
        return Err(Error::GridMismatch);
    }
    let opts = TrajectoryOptions { scheme: Scheme::Rk2, substeps: 1 };
    Ok(backtrack(grid, force, 0.0, dt, opts))
}
