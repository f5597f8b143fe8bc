//! Field solvers that need no FFT: Dirichlet Poisson, `E⊥`, the modified
//! Poisson source, 1D transverse Maxwell and phase-space moments.
//!
//! Units are normalized (`e = m = c = ε₀ = ω_p = 1`).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::grid::{BoundaryKind, CellField, Grid2D};
use crate::math::{exp, sin, sqrt};
use crate::{Error, Result};

/// Potential `φ` at cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub grid: Grid2D,
    pub phi: Vec<f64>,
}

/// `E⊥ = (-∂_y φ, ∂_x φ)` at cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectricField2D {
    pub grid: Grid2D,
    pub ex: Vec<f64>,
    pub ey: Vec<f64>,
}

impl ElectricField2D {
    /// `½ ∬ |E⊥|²`.
    pub fn energy(&self) -> f64 {
        let s: f64 = self.ex.iter().zip(&self.ey).map(|(a, b)| a * a + b * b).sum();
        0.5 * s * self.grid.cell_area()
    }
}

/// Direct solver for `-Δφ = ρ` with `φ = 0` on the boundary.
///
/// The 5-point Laplacian uses mirrored ghosts `φ_{-1} = -φ_0`. The `x`
/// direction is diagonalised exactly by the sine basis
/// `sin(π(k+1)(i+½)/N)`, leaving one tridiagonal system in `y` per mode.
#[derive(Debug, Clone)]
pub struct DirichletPoisson {
    grid: Grid2D,
    basis: Vec<f64>,
    norms: Vec<f64>,
    eigen: Vec<f64>,
}

impl DirichletPoisson {
    pub fn new(grid: Grid2D) -> Result<Self> {
        if grid.x.bc != BoundaryKind::Zero || grid.y.bc != BoundaryKind::Zero {
            return Err(Error::Usage("Dirichlet Poisson needs zero boundaries on both axes".into()));
        }
        let n = grid.nx();
        let mut basis = vec![0.0; n * n];
        let mut norms = vec![0.0; n];
        let mut eigen = vec![0.0; n];
        let h2 = grid.dx() * grid.dx();
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                let v = sin(PI * (k + 1) as f64 * (i as f64 + 0.5) / n as f64);
                basis[k * n + i] = v;
                s += v * v;
            }
            norms[k] = s;
            let q = sin(PI * (k + 1) as f64 / (2 * n) as f64);
            eigen[k] = 4.0 * q * q / h2;
        }
        Ok(Self { grid, basis, norms, eigen })
    }

    pub fn solve(&self, rho: &[f64]) -> Result<PotentialField> {
        let g = &self.grid;
        let (nx, ny) = (g.nx(), g.ny());
        if rho.len() != g.len() {
            return Err(Error::GridMismatch);
        }
        // coefficients c[k][j]
        let mut c = vec![0.0; nx * ny];
        for j in 0..ny {
            let row = &rho[j * nx..(j + 1) * nx];
            for k in 0..nx {
                let b = &self.basis[k * nx..(k + 1) * nx];
                let s: f64 = row.iter().zip(b).map(|(r, v)| r * v).sum();
                c[k * ny + j] = s / self.norms[k];
            }
        }
        let iy2 = 1.0 / (g.dy() * g.dy());
        let mut diag = vec![0.0; ny];
        let mut work = vec![0.0; ny];
        for k in 0..nx {
            for (j, d) in diag.iter_mut().enumerate() {
                let ends = if j == 0 || j + 1 == ny { 3.0 } else { 2.0 };
                *d = ends * iy2 + self.eigen[k];
            }
            thomas(-iy2, &diag, &mut c[k * ny..(k + 1) * ny], &mut work);
        }
        let mut phi = vec![0.0; nx * ny];
        for j in 0..ny {
            for k in 0..nx {
                let a = c[k * ny + j];
                let b = &self.basis[k * nx..(k + 1) * nx];
                for (p, v) in phi[j * nx..(j + 1) * nx].iter_mut().zip(b) {
                    *p += a * v;
                }
            }
        }
        let out = PotentialField { grid: *g, phi };
        let res = dirichlet_residual(&out, rho);
        let scale = rho.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
        if !(res <= 1e-9 * scale) {
            return Err(Error::Numerical(format!("Poisson residual {res:e} relative to source {scale:e}")));
        }
        Ok(out)
    }
}

/// Symmetric tridiagonal solve with constant off-diagonal `off`.
fn thomas(off: f64, diag: &[f64], rhs: &mut [f64], work: &mut [f64]) {
    let n = diag.len();
    let mut beta = diag[0];
    rhs[0] /= beta;
    for j in 1..n {
        work[j] = off / beta;
        beta = diag[j] - off * work[j];
        rhs[j] = (rhs[j] - off * rhs[j - 1]) / beta;
    }
    for j in (0..n - 1).rev() {
        rhs[j] -= work[j + 1] * rhs[j + 1];
    }
}

/// Max-norm of `-Δ_h φ - ρ` with mirrored zero ghosts.
pub fn dirichlet_residual(phi: &PotentialField, rho: &[f64]) -> f64 {
    let g = &phi.grid;
    let (nx, ny) = (g.nx() as isize, g.ny() as isize);
    let at = |i: isize, j: isize| -> f64 {
        let ii = i.clamp(0, nx - 1);
        let jj = j.clamp(0, ny - 1);
        let v = phi.phi[(jj * nx + ii) as usize];
        if ii != i || jj != j {
            -v
        } else {
            v
        }
    };
    let (ix2, iy2) = (1.0 / (g.dx() * g.dx()), 1.0 / (g.dy() * g.dy()));
    let mut r: f64 = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let c = at(i, j);
            let lap = (at(i + 1, j) - 2.0 * c + at(i - 1, j)) * ix2 + (at(i, j + 1) - 2.0 * c + at(i, j - 1)) * iy2;
            r = r.max((-lap - rho[(j * nx + i) as usize]).abs());
        }
    }
    r
}

pub fn poisson_dirichlet(rho: &CellField) -> Result<PotentialField> {
    DirichletPoisson::new(rho.grid)?.solve(&rho.values)
}

/// Central-difference `E⊥`. Periodic axes wrap; zero axes mirror `φ`
/// to `-φ` across the boundary.
pub fn e_perp_from_phi(phi: &PotentialField) -> ElectricField2D {
    let g = &phi.grid;
    let (nx, ny) = (g.nx() as isize, g.ny() as isize);
    let sample = |i: isize, j: isize| -> f64 {
        let (wi, si) = ghost(i, nx, g.x.bc);
        let (wj, sj) = ghost(j, ny, g.y.bc);
        si * sj * phi.phi[(wj * nx + wi) as usize]
    };
    let mut ex = vec![0.0; g.len()];
    let mut ey = vec![0.0; g.len()];
    let (hx, hy) = (0.5 / g.dx(), 0.5 / g.dy());
    for j in 0..ny {
        for i in 0..nx {
            let k = (j * nx + i) as usize;
            ex[k] = -(sample(i, j + 1) - sample(i, j - 1)) * hy;
            ey[k] = (sample(i + 1, j) - sample(i - 1, j)) * hx;
        }
    }
    ElectricField2D { grid: *g, ex, ey }
}

#[inline]
fn ghost(i: isize, n: isize, bc: BoundaryKind) -> (isize, f64) {
    match bc {
        BoundaryKind::Periodic => (i.rem_euclid(n), 1.0),
        BoundaryKind::Zero => {
            if i < 0 {
                (-1 - i, -1.0)
            } else if i >= n {
                (2 * n - 1 - i, -1.0)
            } else {
                (i, 1.0)
            }
        }
    }
}

/// Parameters of `-Δφ = k f + ε exp(-((x̂-½)² + (ŷ-½)²)/(2σ²))` with
/// `x̂ = (x - x_min)/l_x`, `ŷ = (y - y_min)/l_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    pub k: f64,
    pub eps: f64,
    pub sigma: f64,
    pub lx: f64,
    pub ly: f64,
}

impl SourceParams {
    pub fn new(k: f64, eps: f64, sigma: f64, lx: f64, ly: f64) -> Result<Self> {
        if !(sigma > 0.0) || !(lx > 0.0) || !(ly > 0.0) {
            return Err(Error::Usage("source needs sigma, lx, ly > 0".into()));
        }
        Ok(Self { k, eps, sigma, lx, ly })
    }
}

pub fn modified_source(f: &CellField, params: &SourceParams) -> CellField {
    let g = f.grid;
    let mut out = f.clone();
    let inv = 1.0 / (2.0 * params.sigma * params.sigma);
    for j in 0..g.ny() {
        let yh = (g.y.center(j as isize) - g.y.min) / params.ly - 0.5;
        for i in 0..g.nx() {
            let xh = (g.x.center(i as isize) - g.x.min) / params.lx - 0.5;
            let k = g.idx(i, j);
            out.values[k] = params.k * f.values[k] + params.eps * exp(-(xh * xh + yh * yh) * inv);
        }
    }
    out
}

/// Transverse fields of the 1D relativistic model on a periodic line.
///
/// `E_y, E_z` live at cell centres and half-integer times; `B_y, B_z` at
/// faces `x_{i+½}` and integer times; `A_y, A_z` and `E_x` at cell centres
/// and integer times.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxwellState {
    pub dx: f64,
    pub ey: Vec<f64>,
    pub ez: Vec<f64>,
    pub by: Vec<f64>,
    pub bz: Vec<f64>,
    pub ay: Vec<f64>,
    pub az: Vec<f64>,
    pub ex: Vec<f64>,
    /// Time of the integer-level quantities.
    pub time: f64,
}

impl MaxwellState {
    pub fn zeros(n: usize, dx: f64) -> Self {
        Self {
            dx,
            ey: vec![0.0; n],
            ez: vec![0.0; n],
            by: vec![0.0; n],
            bz: vec![0.0; n],
            ay: vec![0.0; n],
            az: vec![0.0; n],
            ex: vec![0.0; n],
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.ey.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ey.is_empty()
    }

    /// `a² = A_y² + A_z²` at cell centres.
    pub fn a_squared(&self) -> Vec<f64> {
        self.ay.iter().zip(&self.az).map(|(a, b)| a * a + b * b).collect()
    }

    /// `½ Σ (E_x² + E_y² + E_z² + B_y² + B_z²) Δx`.
    pub fn energy(&self) -> f64 {
        let mut s = 0.0;
        for v in [&self.ex, &self.ey, &self.ez, &self.by, &self.bz] {
            s += v.iter().map(|a| a * a).sum::<f64>();
        }
        0.5 * s * self.dx
    }

    pub fn is_finite(&self) -> bool {
        [&self.ex, &self.ey, &self.ez, &self.by, &self.bz, &self.ay, &self.az].iter().all(|v| v.iter().all(|a| a.is_finite()))
    }

    /// Leapfrog step: `E^{n-½} → E^{n+½}` with the source `A^n ρ_γ^n`,
    /// then `B^n → B^{n+1}` and `A^{n+1} = A^n - Δt E^{n+½}`.
    pub fn step(&mut self, rho_gamma: &[f64], dt: f64) -> Result<()> {
        let n = self.len();
        if rho_gamma.len() != n {
            return Err(Error::GridMismatch);
        }
        let r = dt / self.dx;
        for i in 0..n {
            let im = (i + n - 1) % n;
            self.ey[i] += -r * (self.bz[i] - self.bz[im]) + dt * self.ay[i] * rho_gamma[i];
            self.ez[i] += r * (self.by[i] - self.by[im]) + dt * self.az[i] * rho_gamma[i];
        }
        for i in 0..n {
            let ip = (i + 1) % n;
            self.by[i] += r * (self.ez[ip] - self.ez[i]);
            self.bz[i] -= r * (self.ey[ip] - self.ey[i]);
        }
        for i in 0..n {
            self.ay[i] -= dt * self.ey[i];
            self.az[i] -= dt * self.ez[i];
        }
        self.time += dt;
        Ok(())
    }
}

pub fn maxwell_step(state: &MaxwellState, rho_gamma: &[f64], dt: f64) -> Result<MaxwellState> {
    let mut next = state.clone();
    next.step(rho_gamma, dt)?;
    Ok(next)
}

/// `E_x ← E_x - Δt J`.
pub fn ampere_update(ex: &mut [f64], current: &[f64], dt: f64) -> Result<()> {
    if ex.len() != current.len() {
        return Err(Error::GridMismatch);
    }
    for (e, j) in ex.iter_mut().zip(current) {
        *e -= dt * j;
    }
    Ok(())
}

/// Velocity moments of a phase-space field (`x` along the first axis,
/// `p` along the second), midpoint rule over momentum cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    /// `∫ f dp`
    pub density: Vec<f64>,
    /// `∫ f/γ dp`
    pub rho_gamma: Vec<f64>,
    /// `∫ (p/γ) f dp`
    pub current: Vec<f64>,
    /// `∫ (γ - 1) f dp`
    pub kinetic: Vec<f64>,
}

pub fn moments(f: &CellField, a2: &[f64]) -> Result<Moments> {
    let g = f.grid;
    let nx = g.nx();
    if a2.len() != nx {
        return Err(Error::GridMismatch);
    }
    let dp = g.dy();
    let mut m = Moments { density: vec![0.0; nx], rho_gamma: vec![0.0; nx], current: vec![0.0; nx], kinetic: vec![0.0; nx] };
    for j in 0..g.ny() {
        let p = g.y.center(j as isize);
        for i in 0..nx {
            let v = f.values[g.idx(i, j)] * dp;
            let gamma = sqrt(1.0 + p * p + a2[i]);
            m.density[i] += v;
            m.rho_gamma[i] += v / gamma;
            m.current[i] += v * p / gamma;
            m.kinetic[i] += v * (gamma - 1.0);
        }
    }
    Ok(m)
}

/// Second-order central derivative on a periodic line of centred samples.
pub fn periodic_derivative(v: &[f64], dx: f64) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| (v[(i + 1) % n] - v[(i + n - 1) % n]) / (2.0 * dx)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::init_cell_averages;
    use crate::math::cos;

    fn unit_dirichlet(n: usize) -> Grid2D {
        Grid2D::new((0.0, 1.0), n, (0.0, 1.0), n, BoundaryKind::Zero, BoundaryKind::Zero).unwrap()
    }

    #[test]
    fn zero_source_zero_potential() {
        let g = unit_dirichlet(8);
        let p = poisson_dirichlet(&CellField::zeros(g)).unwrap();
        assert!(p.phi.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn manufactured_solution_second_order() {
        let err = |n: usize| {
            let g = unit_dirichlet(n);
            let mut rho = CellField::zeros(g);
            for j in 0..n {
                for i in 0..n {
                    let (x, y) = (g.x.center(i as isize), g.y.center(j as isize));
                    rho.values[g.idx(i, j)] = 2.0 * PI * PI * sin(PI * x) * sin(PI * y);
                }
            }
            let p = poisson_dirichlet(&rho).unwrap();
            let mut e: f64 = 0.0;
            for j in 0..n {
                for i in 0..n {
                    let (x, y) = (g.x.center(i as isize), g.y.center(j as isize));
                    e = e.max((p.phi[g.idx(i, j)] - sin(PI * x) * sin(PI * y)).abs());
                }
            }
            e
        };
        let order = libm::log2(err(32) / err(64));
        assert!((order - 2.0).abs() < 0.2, "{order}");
    }

    #[test]
    fn rectangular_grid_residual() {
        let g = Grid2D::new((-1.0, 2.0), 24, (0.0, 1.0), 10, BoundaryKind::Zero, BoundaryKind::Zero).unwrap();
        let rho = init_cell_averages(g, |x, y| libm::exp(-x * x) * (1.0 + y), 2);
        let p = DirichletPoisson::new(g).unwrap().solve(&rho.values).unwrap();
        assert!(dirichlet_residual(&p, &rho.values) < 1e-11);
    }

    #[test]
    fn point_symmetric_source() {
        let g = unit_dirichlet(16);
        let rho = init_cell_averages(g, |x, y| (x - 0.5) * (y - 0.3) + libm::sin(7.0 * (x - 0.5)), 2);
        let mut sym = rho.clone();
        for j in 0..16 {
            for i in 0..16 {
                let v = 0.5 * (rho.get(i, j) + rho.get(15 - i, 15 - j));
                sym.values[g.idx(i, j)] = v;
            }
        }
        let p = poisson_dirichlet(&sym).unwrap();
        for j in 0..16 {
            for i in 0..16 {
                assert!((p.phi[g.idx(i, j)] - p.phi[g.idx(15 - i, 15 - j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn needs_zero_boundaries() {
        let g = Grid2D::new((0.0, 1.0), 8, (0.0, 1.0), 8, BoundaryKind::Periodic, BoundaryKind::Zero).unwrap();
        assert!(DirichletPoisson::new(g).is_err());
    }

    #[test]
    fn e_perp_of_simple_potentials() {
        let g = Grid2D::new((0.0, 1.0), 8, (0.0, 1.0), 8, BoundaryKind::Periodic, BoundaryKind::Periodic).unwrap();
        let p = PotentialField { grid: g, phi: vec![3.0; 64] };
        let e = e_perp_from_phi(&p);
        assert!(e.ex.iter().chain(&e.ey).all(|v| *v == 0.0));

        let mut phi = vec![0.0; 64];
        for j in 0..8 {
            for i in 0..8 {
                phi[g.idx(i, j)] = g.x.center(i as isize);
            }
        }
        let e = e_perp_from_phi(&PotentialField { grid: g, phi });
        for j in 0..8 {
            for i in 1..7 {
                assert!(e.ex[g.idx(i, j)].abs() < 1e-14);
                assert!((e.ey[g.idx(i, j)] - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn e_perp_second_order() {
        let err = |n: usize| {
            let g = Grid2D::new((0.0, 2.0 * PI), n, (0.0, 2.0 * PI), n, BoundaryKind::Periodic, BoundaryKind::Periodic).unwrap();
            let mut phi = vec![0.0; g.len()];
            for j in 0..n {
                for i in 0..n {
                    phi[g.idx(i, j)] = sin(g.x.center(i as isize)) * sin(g.y.center(j as isize));
                }
            }
            let e = e_perp_from_phi(&PotentialField { grid: g, phi });
            let mut m: f64 = 0.0;
            for j in 0..n {
                for i in 0..n {
                    let (x, y) = (g.x.center(i as isize), g.y.center(j as isize));
                    m = m.max((e.ex[g.idx(i, j)] + sin(x) * cos(y)).abs());
                    m = m.max((e.ey[g.idx(i, j)] - cos(x) * sin(y)).abs());
                }
            }
            m
        };
        let order = libm::log2(err(32) / err(64));
        assert!((order - 2.0).abs() < 0.2, "{order}");
    }

    #[test]
    fn modified_source_values() {
        let g = Grid2D::new((0.0, 16.0), 128, (0.0, 8.0), 64, BoundaryKind::Periodic, BoundaryKind::Periodic).unwrap();
        let params = SourceParams::new(10.0, 0.8, 0.1, 16.0, 8.0).unwrap();
        let ones = CellField::from_values(g, vec![1.0; g.len()], 0.0).unwrap();
        let s = modified_source(&ones, &params);
        let (xh, yh) = (g.x.center(0) / 16.0 - 0.5, g.y.center(0) / 8.0 - 0.5);
        let expected = 10.0 + 0.8 * libm::exp(-(xh * xh + yh * yh) / 0.02);
        assert!((s.values[0] - expected).abs() < 1e-14);
        assert!((s.values[0] - 10.0).abs() < 1e-9);

        let zero = modified_source(&CellField::zeros(g), &params);
        let peak = zero.values.iter().fold(0.0_f64, |m, v| m.max(*v));
        assert!((peak - 0.8).abs() < 0.01);

        let flat = SourceParams::new(10.0, 0.0, 0.1, 16.0, 8.0).unwrap();
        let s = modified_source(&ones, &flat);
        assert!(s.values.iter().all(|v| *v == 10.0));
        assert!(SourceParams::new(1.0, 1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn maxwell_trivial_states() {
        let mut s = MaxwellState::zeros(16, 0.1);
        s.step(&[0.0; 16], 0.05).unwrap();
        assert_eq!(s.energy(), 0.0);
        let mut u = MaxwellState::zeros(16, 0.1);
        u.by = vec![0.7; 16];
        let before = u.clone();
        u.step(&[0.0; 16], 0.05).unwrap();
        assert_eq!(u.by, before.by);
        assert_eq!(u.ez, before.ez);
    }

    #[test]
    fn maxwell_vacuum_wave() {
        // discrete plane wave: E_y = cos(k x - ω t), B_z = cos at faces,
        // with sin(ω Δt/2) = (Δt/Δx) sin(k Δx/2)
        let n = 64;
        let l = 2.0 * PI;
        let dx = l / n as f64;
        let dt = 0.5 * dx;
        let k = 1.0;
        let ks = 2.0 / dx * sin(k * dx / 2.0);
        let omega = 2.0 / dt * libm::asin(dt / 2.0 * ks);
        let mut s = MaxwellState::zeros(n, dx);
        for i in 0..n {
            let xc = (i as f64 + 0.5) * dx;
            let xf = (i as f64 + 1.0) * dx;
            s.ey[i] = cos(k * xc + omega * dt / 2.0);
            s.bz[i] = cos(k * xf);
        }
        let steps = 200;
        for _ in 0..steps {
            s.step(&vec![0.0; n], dt).unwrap();
        }
        let t = steps as f64 * dt;
        for i in 0..n {
            let xc = (i as f64 + 0.5) * dx;
            assert!((s.ey[i] - cos(k * xc - omega * (t - dt / 2.0))).abs() < 1e-10);
        }
    }

    #[test]
    fn moments_of_maxwellian() {
        let g = Grid2D::new((0.0, 1.0), 4, (-8.0, 8.0), 256, BoundaryKind::Periodic, BoundaryKind::Zero).unwrap();
        let f = init_cell_averages(g, |_, p| libm::exp(-p * p / 2.0) / libm::sqrt(2.0 * PI), 4);
        let m = moments(&f, &[0.0; 4]).unwrap();
        for i in 0..4 {
            assert!((m.density[i] - 1.0).abs() < 1e-10);
            assert!(m.current[i].abs() < 1e-12);
            assert!(m.rho_gamma[i] < 1.0 && m.rho_gamma[i] > 0.5);
        }
    }

    #[test]
    fn ampere_with_zero_current() {
        let mut ex = vec![0.1, -0.2, 0.3, 0.0];
        ampere_update(&mut ex, &[0.0; 4], 0.1).unwrap();
        assert_eq!(ex, [0.1, -0.2, 0.3, 0.0]);
    }
}
