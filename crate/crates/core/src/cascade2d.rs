//! Two-dimensional cascade remap.
//!
//! One step maps the backtracked corners of every Eulerian cell onto an
//! intermediate layout, remaps column masses onto intermediate cells (a
//! conservative 1D remap in `y` per column), then remaps those onto the
//! backtracked cells along each row. The freestream correction adjusts the
//! layout so that intermediate row volumes and backtracked cell volumes are
//! exact.
//!
//! Layout storage:
//! - corners and `ỹ`: `(nx + 1) × (ny + 1)`, index `j * (nx + 1) + i`
//! - `ȳ`: `nx × (ny + 1)`, column-major, index `i * (ny + 1) + j`
//! - `x̄`: `(nx + 1) × ny`, index `j * (nx + 1) + i`

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{Axis, BoundaryKind, CellField, Grid2D};
use crate::lagrange::{interpolate, MAX_HALF_DEGREE, MAX_STENCIL};
use crate::math::round;
use crate::recon1d::{csl_remap, limited_remap, CellVolumes, CumulativeFunction, LimiterBounds, MassProfile};
use crate::{Error, Result};

/// Backtracked positions of all cell corners.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerMap {
    pub nx: usize,
    pub ny: usize,
    pub xstar: Vec<f64>,
    pub ystar: Vec<f64>,
}

impl CornerMap {
    pub fn new(grid: &Grid2D, xstar: Vec<f64>, ystar: Vec<f64>) -> Result<Self> {
        let len = (grid.nx() + 1) * (grid.ny() + 1);
        if xstar.len() != len || ystar.len() != len {
            return Err(Error::GridMismatch);
        }
        Ok(Self { nx: grid.nx(), ny: grid.ny(), xstar, ystar })
    }

    /// Applies `map` to every Eulerian corner.
    pub fn from_fn<F>(grid: &Grid2D, mut map: F) -> Self
    where
        F: FnMut(f64, f64) -> (f64, f64),
    {
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut xstar = Vec::with_capacity((nx + 1) * (ny + 1));
        let mut ystar = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            let y = grid.y.face(j as isize);
            for i in 0..=nx {
                let (a, b) = map(grid.x.face(i as isize), y);
                xstar.push(a);
                ystar.push(b);
            }
        }
        Self { nx, ny, xstar, ystar }
    }

    pub fn identity(grid: &Grid2D) -> Self {
        Self::from_fn(grid, |x, y| (x, y))
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn corner(&self, i: usize, j: usize) -> (f64, f64) {
        let k = self.idx(i, j);
        (self.xstar[k], self.ystar[k])
    }

    pub fn is_finite(&self) -> bool {
        self.xstar.iter().chain(&self.ystar).all(|v| v.is_finite())
    }

    /// Unwraps each curve continuously and closes periodic edges exactly:
    /// the last column (row) becomes the first plus the period.
    pub fn canonicalize(&mut self, grid: &Grid2D) {
        let (nx, ny) = (self.nx, self.ny);
        if grid.x.bc == BoundaryKind::Periodic {
            let (lx, dx) = (grid.x.length(), grid.dx());
            for j in 0..=ny {
                for i in 1..nx {
                    let prev = self.xstar[self.idx(i - 1, j)];
                    let k = self.idx(i, j);
                    let shift = round((prev + dx - self.xstar[k]) / lx);
                    self.xstar[k] += shift * lx;
                }
                let (first, last) = (self.idx(0, j), self.idx(nx, j));
                self.xstar[last] = self.xstar[first] + lx;
                self.ystar[last] = self.ystar[first];
            }
        }
        if grid.y.bc == BoundaryKind::Periodic {
            let (ly, dy) = (grid.y.length(), grid.dy());
            for i in 0..=nx {
                for j in 1..ny {
                    let prev = self.ystar[self.idx(i, j - 1)];
                    let k = self.idx(i, j);
                    let shift = round((prev + dy - self.ystar[k]) / ly);
                    self.ystar[k] += shift * ly;
                }
                let (first, last) = (self.idx(i, 0), self.idx(i, ny));
                self.ystar[last] = self.ystar[first] + ly;
                self.xstar[last] = self.xstar[first];
            }
        }
    }
}

/// Intersection ordinates and averaged faces of the intermediate cells.
#[derive(Debug, Clone, PartialEq)]
pub struct IntermediateLayout {
    pub nx: usize,
    pub ny: usize,
    pub ytilde: Vec<f64>,
    pub ybar: Vec<f64>,
    pub xbar: Vec<f64>,
}

impl IntermediateLayout {
    #[inline]
    pub fn ybar_at(&self, i: usize, j: usize) -> f64 {
        self.ybar[i * (self.ny + 1) + j]
    }

    #[inline]
    pub fn xbar_at(&self, i: usize, j: usize) -> f64 {
        self.xbar[j * (self.nx + 1) + i]
    }

    /// Faces `ȳ_{i, 0..=ny}` of column `i`.
    pub fn column_faces(&self, i: usize) -> &[f64] {
        &self.ybar[i * (self.ny + 1)..(i + 1) * (self.ny + 1)]
    }

    /// Faces `x̄_{0..=nx, j}` of row `j`.
    pub fn row_faces(&self, j: usize) -> &[f64] {
        &self.xbar[j * (self.nx + 1)..(j + 1) * (self.nx + 1)]
    }

    /// Intermediate cell volumes `Δx (ȳ_{i,j+1} - ȳ_{i,j})`, row-major.
    pub fn intermediate_volumes(&self, grid: &Grid2D) -> Vec<f64> {
        let mut v = vec![0.0; self.nx * self.ny];
        for i in 0..self.nx {
            let col = self.column_faces(i);
            for j in 0..self.ny {
                v[j * self.nx + i] = grid.dx() * (col[j + 1] - col[j]);
            }
        }
        v
    }
}

/// Options of one cascade step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcslOptions {
    /// Half-degree `d` of the `2d+1` reconstruction.
    pub degree: usize,
    pub freestream_correction: bool,
    pub limiter: LimiterBounds,
    /// Fixed face of the column-stage correction; `None` means the middle.
    pub anchor_row: Option<usize>,
    /// Fixed face of the row-stage correction; `None` means the middle.
    pub anchor_col: Option<usize>,
}

impl Default for CcslOptions {
    fn default() -> Self {
        Self { degree: 2, freestream_correction: false, limiter: LimiterBounds::disabled(), anchor_row: None, anchor_col: None }
    }
}

impl CcslOptions {
    /// Freestream correction and limiter both on.
    pub fn improved(degree: usize, f_min: f64, f_max: f64) -> Result<Self> {
        Ok(Self {
            degree,
            freestream_correction: true,
            limiter: LimiterBounds::new(f_min, f_max)?,
            anchor_row: None,
            anchor_col: None,
        })
    }

    fn validate(&self, grid: &Grid2D) -> Result<()> {
        if self.degree > MAX_HALF_DEGREE {
            return Err(Error::Usage(format!("degree {} exceeds the supported maximum {MAX_HALF_DEGREE}", self.degree)));
        }
        if let Some(l) = self.anchor_row {
            if l >= grid.ny() {
                return Err(Error::Usage(format!("anchor row {l} outside 0..{}", grid.ny())));
            }
        }
        if let Some(k) = self.anchor_col {
            if k >= grid.nx() {
                return Err(Error::Usage(format!("anchor column {k} outside 0..{}", grid.nx())));
            }
        }
        Ok(())
    }
}

/// Ratios of the along-axis velocity variation to the mesh size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    /// `max |a^x_{i+1,j} - a^x_{i,j}| / Δx · Δt`
    pub ratio_x: f64,
    /// `max |a^y_{i,j+1} - a^y_{i,j}| / Δy · Δt`
    pub ratio_y: f64,
    /// Cross variations `max |a^x_{i,j+1} - a^x_{i,j}| / Δx · Δt` and the
    /// `y` mirror; informative only.
    pub shear_x: f64,
    pub shear_y: f64,
}

impl ValidityReport {
    pub fn ok(&self) -> bool {
        self.ratio_x < 1.0 && self.ratio_y < 1.0
    }
}

/// Checks the cascade admissibility bound on velocities sampled at the
/// points `(x_i, y_j)`; `ax`, `ay` are `n_x × n_y` row-major.
pub fn validity_check(ax: &[f64], ay: &[f64], nx: usize, ny: usize, dx: f64, dy: f64, dt: f64) -> ValidityReport {
    let mut r = ValidityReport { ratio_x: 0.0, ratio_y: 0.0, shear_x: 0.0, shear_y: 0.0 };
    let at = |a: &[f64], i: usize, j: usize| a[j * nx + i];
    for j in 0..ny {
        for i in 0..nx {
            if i + 1 < nx {
                r.ratio_x = r.ratio_x.max((at(ax, i + 1, j) - at(ax, i, j)).abs());
                r.shear_y = r.shear_y.max((at(ay, i + 1, j) - at(ay, i, j)).abs());
            }
            if j + 1 < ny {
                r.ratio_y = r.ratio_y.max((at(ay, i, j + 1) - at(ay, i, j)).abs());
                r.shear_x = r.shear_x.max((at(ax, i, j + 1) - at(ax, i, j)).abs());
            }
        }
    }
    r.ratio_x *= dt / dx;
    r.shear_x *= dt / dx;
    r.ratio_y *= dt / dy;
    r.shear_y *= dt / dy;
    r
}

/// Curve nodes `(x*, y*)` of one row, extended by periodic images.
struct RowCurve<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
    n: isize,
    period: Option<f64>,
}

impl RowCurve<'_> {
    #[inline]
    fn node(&self, k: isize) -> (f64, f64) {
        match self.period {
            Some(l) => {
                let q = k.div_euclid(self.n);
                let r = k.rem_euclid(self.n) as usize;
                (self.xs[r] + q as f64 * l, self.ys[r])
            }
            None => (self.xs[k as usize], self.ys[k as usize]),
        }
    }

    /// Ordinate of the curve at abscissa `x`, starting the bracket search
    /// at node `hint`.
    fn intersect(&self, x: f64, d: usize, hint: &mut isize) -> f64 {
        let n = self.n;
        let mut b = *hint;
        if self.period.is_none() {
            let (x0, y0) = self.node(0);
            let (x1, y1) = self.node(1);
            if x < x0 {
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
            let (xa, ya) = self.node(n - 1);
            let (xb, yb) = self.node(n);
            if x > xb {
                return yb + (yb - ya) * (x - xb) / (xb - xa);
            }
            b = b.clamp(0, n - 1);
            while b < n - 1 && self.node(b + 1).0 <= x {
                b += 1;
            }
            while b > 0 && self.node(b).0 > x {
                b -= 1;
            }
        } else {
            while self.node(b + 1).0 <= x {
                b += 1;
            }
            while self.node(b).0 > x {
                b -= 1;
            }
        }
        *hint = b;
        let (xb, yb) = self.node(b);
        if xb == x {
            return yb;
        }
        let m = 2 * d as isize + 2;
        let mut lo = b - d as isize;
        if self.period.is_none() {
            lo = lo.clamp(0, (n + 1 - m).max(0));
        }
        let hi = (lo + m).min(if self.period.is_none() { n + 1 } else { lo + m });
        let mut px = [0.0; MAX_STENCIL];
        let mut py = [0.0; MAX_STENCIL];
        let cnt = (hi - lo) as usize;
        for (a, k) in (lo..hi).enumerate() {
            let (u, v) = self.node(k);
            px[a] = u;
            py[a] = v;
        }
        interpolate(&px[..cnt], &py[..cnt], x)
    }
}

fn check_row_curve(xs: &[f64], j: usize) -> Result<()> {
    for (i, w) in xs.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::Geometry(format!("backtracked row {j} folds between corners {i} and {}", i + 1)));
        }
    }
    Ok(())
}

/// Builds `ỹ`, `ȳ` and `x̄` from canonicalized corners.
pub fn build_intermediate_layout(corners: &CornerMap, grid: &Grid2D, degree: usize) -> Result<IntermediateLayout> {
    if corners.nx != grid.nx() || corners.ny != grid.ny() {
        return Err(Error::GridMismatch);
    }
    if !corners.is_finite() {
        return Err(Error::Numerical("non-finite backtracked corner".into()));
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let w = nx + 1;
    let px = grid.x.bc == BoundaryKind::Periodic;
    let py = grid.y.bc == BoundaryKind::Periodic;

    let mut ytilde = vec![0.0; w * (ny + 1)];
    let rows = if py { ny } else { ny + 1 };
    for j in 0..rows {
        let xs = &corners.xstar[j * w..(j + 1) * w];
        let ys = &corners.ystar[j * w..(j + 1) * w];
        check_row_curve(xs, j)?;
        let curve = RowCurve {
            xs: if px { &xs[..nx] } else { xs },
            ys: if px { &ys[..nx] } else { ys },
            n: nx as isize,
            period: px.then(|| grid.x.length()),
        };
        let mut hint = 0;
        let last = if px { nx } else { nx + 1 };
        for i in 0..last {
            ytilde[j * w + i] = curve.intersect(grid.x.face(i as isize), degree, &mut hint);
        }
        if px {
            ytilde[j * w + nx] = ytilde[j * w];
        }
    }
    if py {
        let ly = grid.y.length();
        for i in 0..w {
            ytilde[ny * w + i] = ytilde[i] + ly;
        }
    }

    let mut ybar = vec![0.0; nx * (ny + 1)];
    for i in 0..nx {
        for j in 0..=ny {
            ybar[i * (ny + 1) + j] = 0.5 * (ytilde[j * w + i] + ytilde[j * w + i + 1]);
        }
    }

    let mut xbar = vec![0.0; w * ny];
    for j in 0..ny {
        for i in 0..w {
            xbar[j * w + i] = 0.5 * (corners.xstar[j * w + i] + corners.xstar[(j + 1) * w + i]);
        }
        if px {
            xbar[j * w + nx] = xbar[j * w] + grid.x.length();
        }
    }

    Ok(IntermediateLayout { nx, ny, ytilde, ybar, xbar })
}

/// Column-stage correction: shifts the faces `ȳ_{·,j}` of each row
/// uniformly so that every row of intermediate cells has volume
/// `n_x Δx Δy`. Face `anchor` stays fixed. Requires periodic `x`.
pub fn freestream_correct_columns(layout: &mut IntermediateLayout, grid: &Grid2D, anchor: usize) -> Result<()> {
    if grid.x.bc != BoundaryKind::Periodic {
        return Err(Error::Usage("column freestream correction needs a periodic x axis".into()));
    }
    let (nx, ny) = (layout.nx, layout.ny);
    let target = nx as f64 * grid.cell_area();
    let scale = 1.0 / (nx as f64 * grid.dx());
    let mut dv = vec![0.0; ny];
    for (j, v) in dv.iter_mut().enumerate() {
        let mut sum = 0.0;
        for i in 0..nx {
            sum += grid.dx() * (layout.ybar_at(i, j + 1) - layout.ybar_at(i, j));
        }
        *v = sum - target;
    }
    let mut shift = vec![0.0; ny + 1];
    let mut acc = 0.0;
    for j in anchor..ny {
        acc += dv[j];
        shift[j + 1] = -acc * scale;
    }
    acc = 0.0;
    for j in (0..anchor).rev() {
        acc += dv[j];
        shift[j] = acc * scale;
    }
    for i in 0..nx {
        let col = &mut layout.ybar[i * (ny + 1)..(i + 1) * (ny + 1)];
        for (y, s) in col.iter_mut().zip(&shift) {
            *y += s;
        }
        if grid.y.bc == BoundaryKind::Periodic {
            col[ny] = col[0] + grid.y.length();
        }
    }
    Ok(())
}

/// Row-stage correction: recomputes the faces `x̄_{·,j}` outward from face
/// `anchor` so that each backtracked cell covers exactly `Δx Δy` of the
/// reconstructed intermediate volume.
pub fn freestream_correct_rows(layout: &mut IntermediateLayout, grid: &Grid2D, anchor: usize, degree: usize) -> Result<()> {
    let (nx, ny) = (layout.nx, layout.ny);
    let w = nx + 1;
    let area = grid.cell_area();
    let volumes = layout.intermediate_volumes(grid);
    let periodic = grid.x.bc == BoundaryKind::Periodic;
    for j in 0..ny {
        let row_v = &volumes[j * nx..(j + 1) * nx];
        if let Some(i) = row_v.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::Geometry(format!("intermediate cell ({i}, {j}) has non-positive volume")));
        }
        let c = CumulativeFunction::new(grid.x, row_v, area, degree)?;
        let row = &mut layout.xbar[j * w..(j + 1) * w];
        let base = c.eval(row[anchor]);
        let mut hint = grid.x.locate(row[anchor]).0;
        let right_end = if periodic { nx - 1 } else { nx };
        for i in anchor + 1..=right_end {
            let x = c.invert(base + (i - anchor) as f64 * area, hint)?;
            hint = grid.x.locate(x).0;
            row[i] = x;
        }
        hint = grid.x.locate(row[anchor]).0;
        for i in (0..anchor).rev() {
            let x = c.invert(base - (anchor - i) as f64 * area, hint)?;
            hint = grid.x.locate(x).0;
            row[i] = x;
        }
        if periodic {
            row[nx] = row[0] + grid.x.length();
        }
    }
    Ok(())
}

/// Both correction stages; the column stage only runs on a periodic `x`
/// axis.
pub fn freestream_correct(layout: &mut IntermediateLayout, grid: &Grid2D, options: &CcslOptions) -> Result<()> {
    if grid.x.bc == BoundaryKind::Periodic {
        freestream_correct_columns(layout, grid, options.anchor_row.unwrap_or(grid.ny() / 2))?;
    }
    freestream_correct_rows(layout, grid, options.anchor_col.unwrap_or(grid.nx() / 2), options.degree)
}

fn remap_line(faces: &[f64], axis: Axis, masses: &[f64], options: &CcslOptions, volumes: CellVolumes<'_>) -> Result<Vec<f64>> {
    let profile = MassProfile::new(axis, masses)?;
    if options.limiter.enabled {
        limited_remap(faces, &profile, options.degree, &options.limiter, volumes)
    } else {
        csl_remap(faces, &profile, options.degree)
    }
}

/// Intermediate masses `m_I`, row-major, from the column remaps.
pub fn column_remap(layout: &IntermediateLayout, field: &CellField, options: &CcslOptions) -> Result<Vec<f64>> {
    let grid = field.grid;
    let (nx, ny) = (grid.nx(), grid.ny());
    let area = grid.cell_area();
    let mut col = vec![0.0; ny];
    let mut out = vec![0.0; nx * ny];
    for i in 0..nx {
        for (j, m) in col.iter_mut().enumerate() {
            *m = area * field.values[grid.idx(i, j)];
        }
        let r = remap_line(layout.column_faces(i), grid.y, &col, options, CellVolumes::Uniform(area))
            .map_err(|e| locate_error(e, "column", i))?;
        for (j, m) in r.into_iter().enumerate() {
            out[j * nx + i] = m;
        }
    }
    Ok(out)
}

/// Backtracked-cell masses `m_B`, row-major, from the row remaps.
pub fn row_remap(layout: &IntermediateLayout, grid: &Grid2D, intermediate: &[f64], options: &CcslOptions) -> Result<Vec<f64>> {
    let (nx, ny) = (grid.nx(), grid.ny());
    if intermediate.len() != nx * ny {
        return Err(Error::GridMismatch);
    }
    let volumes = if options.limiter.enabled { layout.intermediate_volumes(grid) } else { Vec::new() };
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let vols = if options.limiter.enabled {
            CellVolumes::PerCell { values: &volumes[j * nx..(j + 1) * nx], ghost: grid.cell_area() }
        } else {
            CellVolumes::Uniform(grid.cell_area())
        };
        let r = remap_line(layout.row_faces(j), grid.x, &intermediate[j * nx..(j + 1) * nx], options, vols)
            .map_err(|e| locate_error(e, "row", j))?;
        out.extend(r);
    }
    Ok(out)
}

fn locate_error(e: Error, what: &str, k: usize) -> Error {
    match e {
        Error::Ordering { index, left, right } => {
            Error::Geometry(format!("{what} {k}: faces {index} and {} out of order ({left} >= {right})", index + 1))
        }
        other => other,
    }
}

/// One cascade step: `f̄^{n+1} = m_B / (Δx Δy)`. The returned field keeps
/// the input time.
pub fn ccsl_step(field: &CellField, corners: &CornerMap, options: &CcslOptions) -> Result<CellField> {
    let grid = field.grid;
    options.validate(&grid)?;
    let mut corners = corners.clone();
    corners.canonicalize(&grid);
    let mut layout = build_intermediate_layout(&corners, &grid, options.degree)?;
    if options.freestream_correction {
        freestream_correct(&mut layout, &grid, options)?;
    }
    let mi = column_remap(&layout, field, options)?;
    let mb = row_remap(&layout, &grid, &mi, options)?;
    let inv = 1.0 / grid.cell_area();
    let values = mb.into_iter().map(|m| m * inv).collect();
    CellField::from_values(grid, values, field.time)
}

/// Volumes of the backtracked cells implied by a layout, row-major.
pub fn backtracked_volumes(layout: &IntermediateLayout, grid: &Grid2D, degree: usize) -> Result<Vec<f64>> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let vols = layout.intermediate_volumes(grid);
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let c = CumulativeFunction::new(grid.x, &vols[j * nx..(j + 1) * nx], grid.cell_area(), degree)?;
        let faces = layout.row_faces(j);
        for i in 0..nx {
            out.push(c.eval(faces[i + 1]) - c.eval(faces[i]));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::init_cell_averages;
    use core::f64::consts::PI;

    fn periodic(n: usize) -> Grid2D {
        Grid2D::new((0.0, 1.0), n, (0.0, 1.0), n, BoundaryKind::Periodic, BoundaryKind::Periodic).unwrap()
    }

    fn smooth(grid: Grid2D) -> CellField {
        init_cell_averages(grid, |x, y| 1.0 + 0.5 * libm::sin(2.0 * PI * x) * libm::cos(2.0 * PI * y), 4)
    }

    #[test]
    fn identity_layout() {
        let g = periodic(8);
        let mut c = CornerMap::identity(&g);
        c.canonicalize(&g);
        let l = build_intermediate_layout(&c, &g, 2).unwrap();
        for i in 0..8 {
            for j in 0..=8 {
                assert_eq!(l.ybar_at(i, j), g.y.face(j as isize));
            }
        }
        for j in 0..8 {
            assert_eq!(l.row_faces(j), g.x.faces().as_slice());
        }
    }

    #[test]
    fn identity_step_reproduces_field() {
        let g = periodic(12);
        let f = smooth(g);
        let out = ccsl_step(&f, &CornerMap::identity(&g), &CcslOptions::default()).unwrap();
        for (a, b) in out.values.iter().zip(&f.values) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn translation_layout_is_affine() {
        let g = periodic(10);
        let (cx, cy) = (0.0123, -0.031);
        let mut c = CornerMap::from_fn(&g, |x, y| (x - cx, y - cy));
        c.canonicalize(&g);
        let l = build_intermediate_layout(&c, &g, 2).unwrap();
        for i in 0..10 {
            for j in 0..=10 {
                assert!((l.ybar_at(i, j) - (g.y.face(j as isize) - cy)).abs() < 1e-14);
            }
        }
        for j in 0..10 {
            for i in 0..=10 {
                assert!((l.xbar_at(i, j) - (g.x.face(i as isize) - cx)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn translation_by_whole_cells_is_a_shift() {
        let g = periodic(10);
        let f = smooth(g);
        let c = CornerMap::from_fn(&g, |x, y| (x - 0.2, y + 0.1));
        let out = ccsl_step(&f, &c, &CcslOptions::default()).unwrap();
        for j in 0..10 {
            for i in 0..10 {
                let src = f.get((i + 8) % 10, (j + 1) % 10);
                assert!((out.get(i, j) - src).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn validity_ratios() {
        let (n, dt) = (40, 0.25);
        let d = 2.0 * PI / n as f64;
        let mut ax = vec![0.0; n * n];
        let mut ay = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (-PI + i as f64 * d, -PI + j as f64 * d);
                ax[j * n + i] = -PI / 2.0 * y;
                ay[j * n + i] = PI / 2.0 * x;
            }
        }
        let r = validity_check(&ax, &ay, n, n, d, d, dt);
        assert!(r.ok());
        assert_eq!((r.ratio_x, r.ratio_y), (0.0, 0.0));
        assert!((r.shear_x - PI / 2.0 * dt).abs() < 1e-12);
        assert!((r.shear_y - PI / 2.0 * dt).abs() < 1e-12);

        let mut bx = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                bx[j * n + i] = i as f64 * d / dt * 1.5;
            }
        }
        let r = validity_check(&bx, &vec![0.0; n * n], n, n, d, d, dt);
        assert!(!r.ok());
        assert!((r.ratio_x - 1.5).abs() < 1e-12);
    }

    fn rotation_corners(g: &Grid2D, angle: f64) -> CornerMap {
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        CornerMap::from_fn(g, |x, y| (c * x - s * y, s * x + c * y))
    }

    #[test]
    fn column_and_row_sums_conserve() {
        let g = Grid2D::new((-PI, PI), 40, (-PI, PI), 40, BoundaryKind::Zero, BoundaryKind::Zero).unwrap();
        let r0 = 0.3 * PI;
        let f = init_cell_averages(
            g,
            |x, y| {
                let r = libm::sqrt((x - 0.3 * PI).powi(2) + y * y);
                if r < r0 {
                    r0 * libm::pow(libm::cos(PI * r / (2.0 * r0)), 6.0)
                } else {
                    0.0
                }
            },
            4,
        );
        let mut c = rotation_corners(&g, -PI / 2.0 * 0.25);
        c.canonicalize(&g);
        let l = build_intermediate_layout(&c, &g, 2).unwrap();
        let opts = CcslOptions::default();
        let mi = column_remap(&l, &f, &opts).unwrap();
        let area = g.cell_area();
        for i in 0..40 {
            let before: f64 = (0..40).map(|j| f.get(i, j) * area).sum();
            let after: f64 = (0..40).map(|j| mi[j * 40 + i]).sum();
            assert!((before - after).abs() <= 1e-13 * before.abs().max(1e-300) + 1e-300);
        }
        let mb = row_remap(&l, &g, &mi, &opts).unwrap();
        for j in 0..40 {
            let before: f64 = mi[j * 40..(j + 1) * 40].iter().sum();
            let after: f64 = mb[j * 40..(j + 1) * 40].iter().sum();
            assert!((before - after).abs() <= 1e-13 * before.abs() + 1e-300);
        }
    }

    #[test]
    fn constant_column_remap_is_exact() {
        let g = periodic(16);
        let f = CellField::from_values(g, vec![2.0; 256], 0.0).unwrap();
        let mut c = CornerMap::from_fn(&g, |x, y| (x - 0.01 * libm::sin(2.0 * PI * y), y - 0.02 * libm::cos(2.0 * PI * x)));
        c.canonicalize(&g);
        let l = build_intermediate_layout(&c, &g, 2).unwrap();
        let mi = column_remap(&l, &f, &CcslOptions::default()).unwrap();
        let v = l.intermediate_volumes(&g);
        for (m, v) in mi.iter().zip(&v) {
            assert!((m - 2.0 * v).abs() < 1e-15);
        }
    }

    fn sheared(g: &Grid2D) -> CornerMap {
        // an incompressible-ish smooth map that does not preserve volumes
        // exactly after discretisation
        CornerMap::from_fn(g, |x, y| {
            let y1 = y - 0.03 * libm::sin(2.0 * PI * x);
            (x - 0.04 * libm::sin(2.0 * PI * y1), y1)
        })
    }

    #[test]
    fn corrected_volumes_are_exact() {
        let g = periodic(24);
        let mut c = sheared(&g);
        c.canonicalize(&g);
        let mut l = build_intermediate_layout(&c, &g, 2).unwrap();
        let raw = backtracked_volumes(&l, &g, 2).unwrap();
        let area = g.cell_area();
        assert!(raw.iter().any(|v| (v - area).abs() > 1e-8 * area));
        freestream_correct(&mut l, &g, &CcslOptions::default()).unwrap();
        let vi = l.intermediate_volumes(&g);
        for j in 0..24 {
            let s: f64 = vi[j * 24..(j + 1) * 24].iter().sum();
            assert!((s - 24.0 * area).abs() < 1e-13 * area);
        }
        let vb = backtracked_volumes(&l, &g, 2).unwrap();
        for v in vb {
            assert!((v - area).abs() < 1e-13 * area);
        }
    }

    #[test]
    fn correction_is_noop_for_translation() {
        let g = periodic(12);
        let mut c = CornerMap::from_fn(&g, |x, y| (x - 0.013, y + 0.027));
        c.canonicalize(&g);
        let l = build_intermediate_layout(&c, &g, 2).unwrap();
        let mut m = l.clone();
        freestream_correct(&mut m, &g, &CcslOptions::default()).unwrap();
        for (a, b) in l.ybar.iter().zip(&m.ybar) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in l.xbar.iter().zip(&m.xbar) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn corrected_step_keeps_constant_state() {
        let g = periodic(24);
        let f = CellField::from_values(g, vec![1.0; 576], 0.0).unwrap();
        let plain = ccsl_step(&f, &sheared(&g), &CcslOptions::default()).unwrap();
        assert!(plain.values.iter().any(|v| (v - 1.0).abs() > 1e-8));
        let opts = CcslOptions { freestream_correction: true, ..CcslOptions::default() };
        let out = ccsl_step(&f, &sheared(&g), &opts).unwrap();
        for v in out.values {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn periodic_mass_conservation() {
        let g = periodic(20);
        let f = smooth(g);
        for opts in [CcslOptions::default(), CcslOptions::improved(2, f.min(), f.max()).unwrap()] {
            let out = ccsl_step(&f, &sheared(&g), &opts).unwrap();
            assert!((out.mass() - f.mass()).abs() < 1e-13 * f.mass());
        }
    }

    #[test]
    fn folded_row_is_a_geometry_error() {
        let g = periodic(8);
        let mut c = CornerMap::identity(&g);
        let k = c.idx(3, 2);
        c.xstar[k] = c.xstar[c.idx(5, 2)];
        assert!(matches!(ccsl_step(&CellField::zeros(g), &c, &CcslOptions::default()), Err(Error::Geometry(_))));
    }

    #[test]
    fn rejects_bad_anchor() {
        let g = periodic(8);
        let opts = CcslOptions { anchor_row: Some(8), ..CcslOptions::default() };
        assert!(matches!(ccsl_step(&CellField::zeros(g), &CornerMap::identity(&g), &opts), Err(Error::Usage(_))));
    }
}
