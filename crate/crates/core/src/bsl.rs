//! Point-to-point backward semi-Lagrangian update.
//!
//! Cell values are treated as point values at cell centres and interpolated
//! at the backtracked centres with a tensor Lagrange polynomial of degree
//! `2d + 1` per axis. Not conservative.

use alloc::vec::Vec;

use crate::grid::{Axis, CellField, Grid2D};
use crate::lagrange::{uniform_weights, MAX_HALF_DEGREE, MAX_STENCIL};
use crate::math::floor;
use crate::{Error, Result};

/// Backtracked cell centres, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMap {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl PointMap {
    pub fn from_fn<F>(grid: &Grid2D, mut map: F) -> Self
    where
        F: FnMut(f64, f64) -> (f64, f64),
    {
        let mut xs = Vec::with_capacity(grid.len());
        let mut ys = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            let y = grid.y.center(j as isize);
            for i in 0..grid.nx() {
                let (a, b) = map(grid.x.center(i as isize), y);
                xs.push(a);
                ys.push(b);
            }
        }
        Self { xs, ys }
    }
}

/// Stencil start and weights for interpolating centred samples at `x`.
#[inline]
pub fn center_stencil(axis: &Axis, x: f64, d: usize, w: &mut [f64]) -> isize {
    let t = (x - axis.min) / axis.delta - 0.5;
    let base = floor(t);
    uniform_weights(d, t - base, w);
    base as isize - d as isize
}

/// 1D interpolation of centred samples with ghost extension.
pub fn interpolate_line(axis: &Axis, values: &[f64], x: f64, d: usize) -> f64 {
    let mut w = [0.0; MAX_STENCIL];
    let start = center_stencil(axis, x, d, &mut w);
    let mut acc = 0.0;
    for (k, wk) in w.iter().enumerate().take(2 * d + 2) {
        if let Some(c) = axis.wrap(start + k as isize) {
            acc += wk * values[c];
        }
    }
    acc
}

fn check(grid: &Grid2D, d: usize) -> Result<()> {
    if d > MAX_HALF_DEGREE {
        return Err(Error::Usage(alloc::format!("degree {d} exceeds the supported maximum")));
    }
    let need = 2 * d + 2;
    let have = grid.nx().min(grid.ny());
    if have < need {
        return Err(Error::Stencil { needed: need, available: have });
    }
    Ok(())
}

pub fn bsl_step(field: &CellField, points: &PointMap, d: usize) -> Result<CellField> {
    let g = field.grid;
    check(&g, d)?;
    if points.xs.len() != g.len() || points.ys.len() != g.len() {
        return Err(Error::GridMismatch);
    }
    let m = 2 * d + 2;
    let mut wx = [0.0; MAX_STENCIL];
    let mut wy = [0.0; MAX_STENCIL];
    let mut out = Vec::with_capacity(g.len());
    for k in 0..g.len() {
        let (x, y) = (points.xs[k], points.ys[k]);
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Numerical("non-finite backtracked point".into()));
        }
        let i0 = center_stencil(&g.x, x, d, &mut wx);
        let j0 = center_stencil(&g.y, y, d, &mut wy);
        let mut acc = 0.0;
        for (b, wb) in wy.iter().enumerate().take(m) {
            let Some(jj) = g.y.wrap(j0 + b as isize) else {
                continue;
            };
            let mut row = 0.0;
            for (a, wa) in wx.iter().enumerate().take(m) {
                if let Some(ii) = g.x.wrap(i0 + a as isize) {
                    row += wa * field.values[g.idx(ii, jj)];
                }
            }
            acc += wb * row;
        }
        out.push(acc);
    }
    CellField::from_values(g, out, field.time)
}
