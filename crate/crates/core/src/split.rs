//! Strang-split baselines: `x` over `Δt/2`, `y` over `Δt`, `x` over `Δt/2`.
//!
//! Each sweep is a family of 1D problems along grid lines with the other
//! coordinate frozen at the cell centre. The `Csl` flavour remaps line
//! masses through backtracked faces and is conservative; the `Bsl` flavour
//! interpolates at backtracked centres.

use alloc::vec;
use alloc::vec::Vec;

use crate::bsl::interpolate_line;
use crate::characteristics::{backtrack_point, TrajectoryOptions, VelocityField};
use crate::grid::{Axis, BoundaryKind, CellField};
use crate::recon1d::{csl_remap, MassProfile};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitFlavor {
    Csl,
    Bsl,
}

#[derive(Clone, Copy)]
enum Dir {
    X,
    Y,
}

/// Foot of a 1D characteristic along one direction.
fn foot<V: VelocityField + ?Sized>(field: &V, dir: Dir, s: f64, other: f64, t_end: f64, dt: f64, opts: TrajectoryOptions) -> f64 {
    match dir {
        Dir::X => {
            let line = |x: f64, _y: f64, t: f64| (field.velocity(x, other, t).0, 0.0);
            backtrack_point(&line, s, 0.0, t_end, dt, opts).0
        }
        Dir::Y => {
            let line = |_x: f64, y: f64, t: f64| (0.0, field.velocity(other, y, t).1);
            backtrack_point(&line, 0.0, s, t_end, dt, opts).1
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn sweep_line<V: VelocityField + ?Sized>(
    axis: &Axis,
    line: &[f64],
    field: &V,
    dir: Dir,
    other: f64,
    t_end: f64,
    dt: f64,
    flavor: SplitFlavor,
    d: usize,
    opts: TrajectoryOptions,
) -> Result<Vec<f64>> {
    let n = axis.n;
    match flavor {
        SplitFlavor::Csl => {
            let mut faces: Vec<f64> = (0..=n).map(|i| foot(field, dir, axis.face(i as isize), other, t_end, dt, opts)).collect();
            if axis.bc == BoundaryKind::Periodic {
                faces[n] = faces[0] + axis.length();
            }
            let masses: Vec<f64> = line.iter().map(|v| v * axis.delta).collect();
            let out = csl_remap(&faces, &MassProfile::new(*axis, &masses)?, d)?;
            Ok(out.into_iter().map(|m| m / axis.delta).collect())
        }
        SplitFlavor::Bsl => Ok((0..n)
            .map(|i| {
                let x = foot(field, dir, axis.center(i as isize), other, t_end, dt, opts);
                interpolate_line(axis, line, x, d)
            })
            .collect()),
    }
}

#[allow(clippy::too_many_arguments)]
fn sweep<V: VelocityField + ?Sized>(
    f: &mut CellField,
    field: &V,
    dir: Dir,
    t_end: f64,
    dt: f64,
    flavor: SplitFlavor,
    d: usize,
    opts: TrajectoryOptions,
) -> Result<()> {
    let g = f.grid;
    let (nx, ny) = (g.nx(), g.ny());
    match dir {
        Dir::X => {
            for j in 0..ny {
                let y = g.y.center(j as isize);
                let row = &f.values[j * nx..(j + 1) * nx];
                let out = sweep_line(&g.x, row, field, dir, y, t_end, dt, flavor, d, opts)?;
                f.values[j * nx..(j + 1) * nx].copy_from_slice(&out);
            }
        }
        Dir::Y => {
            let mut col = vec![0.0; ny];
            for i in 0..nx {
                let x = g.x.center(i as isize);
                for (j, c) in col.iter_mut().enumerate() {
                    *c = f.values[g.idx(i, j)];
                }
                let out = sweep_line(&g.y, &col, field, dir, x, t_end, dt, flavor, d, opts)?;
                for (j, v) in out.into_iter().enumerate() {
                    f.values[g.idx(i, j)] = v;
                }
            }
        }
    }
    Ok(())
}

/// One Strang-split step from `t` to `t + dt`.
pub fn split_step<V: VelocityField + ?Sized>(
    f: &CellField,
    field: &V,
    t: f64,
    dt: f64,
    flavor: SplitFlavor,
    d: usize,
    opts: TrajectoryOptions,
) -> Result<CellField> {
    let mut out = f.clone();
    sweep(&mut out, field, Dir::X, t + 0.5 * dt, 0.5 * dt, flavor, d, opts)?;
    sweep(&mut out, field, Dir::Y, t + dt, dt, flavor, d, opts)?;
    sweep(&mut out, field, Dir::X, t + dt, 0.5 * dt, flavor, d, opts)?;
    Ok(out)
}
