//! FFT-based solvers on periodic grids.

use std::f64::consts::PI;
use std::sync::Arc;

use ccsl_core::fields::PotentialField;
use ccsl_core::{BoundaryKind, CellField, Grid2D};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::RunError;

/// Angular wavenumbers `2πk/L` in FFT ordering.
fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let m = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            2.0 * PI * m / length
        })
        .collect()
}

/// `-Δφ = ρ - <ρ>` on a doubly periodic grid, zero-mean `φ`.
pub struct PeriodicPoisson {
    grid: Grid2D,
    kx: Vec<f64>,
    ky: Vec<f64>,
    fx: Arc<dyn Fft<f64>>,
    fy: Arc<dyn Fft<f64>>,
    ix: Arc<dyn Fft<f64>>,
    iy: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PeriodicPoisson {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicPoisson").field("grid", &self.grid).finish()
    }
}

impl PeriodicPoisson {
    pub fn new(grid: Grid2D) -> Result<Self, RunError> {
        if grid.x.bc != BoundaryKind::Periodic || grid.y.bc != BoundaryKind::Periodic {
            return Err(RunError::Config("spectral Poisson needs a doubly periodic grid".into()));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            grid,
            kx: wavenumbers(grid.nx(), grid.x.length()),
            ky: wavenumbers(grid.ny(), grid.y.length()),
            fx: planner.plan_fft_forward(grid.nx()),
            fy: planner.plan_fft_forward(grid.ny()),
            ix: planner.plan_fft_inverse(grid.nx()),
            iy: planner.plan_fft_inverse(grid.ny()),
        })
    }

    fn transform(&self, data: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        for row in data.chunks_exact_mut(nx) {
            rows.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); ny];
        for i in 0..nx {
            for (j, c) in col.iter_mut().enumerate() {
                *c = data[j * nx + i];
            }
            cols.process(&mut col);
            for (j, c) in col.iter().enumerate() {
                data[j * nx + i] = *c;
            }
        }
    }

    pub fn solve(&self, rho: &[f64]) -> Result<PotentialField, RunError> {
        let g = self.grid;
        if rho.len() != g.len() {
            return Err(RunError::Config("source length does not match the grid".into()));
        }
        let mut data: Vec<Complex64> = rho.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.transform(&mut data, &self.fx, &self.fy);
        let nx = g.nx();
        for (j, ky) in self.ky.iter().enumerate() {
            for (i, kx) in self.kx.iter().enumerate() {
                let k2 = kx * kx + ky * ky;
                let c = &mut data[j * nx + i];
                *c = if k2 == 0.0 { Complex64::new(0.0, 0.0) } else { *c / k2 };
            }
        }
        self.transform(&mut data, &self.ix, &self.iy);
        let scale = 1.0 / g.len() as f64;
        let phi = data.iter().map(|c| c.re * scale).collect();
        Ok(PotentialField { grid: g, phi })
    }

    /// Spectral `-Δφ` of a periodic field.
    pub fn neg_laplacian(&self, phi: &[f64]) -> Vec<f64> {
        let g = self.grid;
        let mut data: Vec<Complex64> = phi.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.transform(&mut data, &self.fx, &self.fy);
        let nx = g.nx();
        for (j, ky) in self.ky.iter().enumerate() {
            for (i, kx) in self.kx.iter().enumerate() {
                data[j * nx + i] *= kx * kx + ky * ky;
            }
        }
        self.transform(&mut data, &self.ix, &self.iy);
        let scale = 1.0 / g.len() as f64;
        data.iter().map(|c| c.re * scale).collect()
    }

    pub fn solve_field(&self, rho: &CellField) -> Result<PotentialField, RunError> {
        if rho.grid != self.grid {
            return Err(RunError::Config("source grid does not match the solver".into()));
        }
        self.solve(&rho.values)
    }
}

/// Spectral solve of `∂ₓEₓ = n - n_i` on a periodic line with zero-mean `Eₓ`.
pub struct GaussSolver {
    n: usize,
    k: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl GaussSolver {
    pub fn new(n: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, k: wavenumbers(n, length), forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    pub fn solve(&self, density: &[f64], n_i: f64) -> Vec<f64> {
        assert_eq!(density.len(), self.n);
        let mut data: Vec<Complex64> = density.iter().map(|v| Complex64::new(v - n_i, 0.0)).collect();
        self.forward.process(&mut data);
        for (c, k) in data.iter_mut().zip(&self.k).skip(1) {
            *c /= Complex64::new(0.0, *k);
        }
        data[0] = Complex64::new(0.0, 0.0);
        // The Nyquist mode has no odd derivative on the grid.
        if self.n.is_multiple_of(2) {
            data[self.n / 2] = Complex64::new(0.0, 0.0);
        }
        self.inverse.process(&mut data);
        let scale = 1.0 / self.n as f64;
        data.iter().map(|c| c.re * scale).collect()
    }
}

/// `Eₓ` from Gauss's law with a neutralizing background equal to the mean density.
pub fn gauss_ex(density: &[f64], length: f64) -> Vec<f64> {
    let n_i = density.iter().sum::<f64>() / density.len() as f64;
    GaussSolver::new(density.len(), length).solve(density, n_i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, ny: usize) -> Grid2D {
        Grid2D::new((0.0, 16.0), nx, (0.0, 8.0), ny, BoundaryKind::Periodic, BoundaryKind::Periodic).unwrap()
    }

    #[test]
    fn eigenfunction() {
        let g = grid(32, 16);
        let (a, b) = (2.0 * PI * 3.0 / 16.0, 2.0 * PI / 8.0);
        let mut rho = vec![0.0; g.len()];
        for j in 0..16 {
            for i in 0..32 {
                rho[g.idx(i, j)] = (a * g.x.center(i as isize)).cos() * (b * g.y.center(j as isize)).sin();
            }
        }
        let p = PeriodicPoisson::new(g).unwrap().solve(&rho).unwrap();
        for (phi, r) in p.phi.iter().zip(&rho) {
            assert!((phi - r / (a * a + b * b)).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_source_gives_zero() {
        let g = grid(16, 8);
        let p = PeriodicPoisson::new(g).unwrap().solve(&vec![3.5; g.len()]).unwrap();
        assert!(p.phi.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn round_trip_removes_mean() {
        let g = grid(24, 12);
        let rho: Vec<f64> = (0..g.len()).map(|k| ((k * 7919) % 101) as f64 / 101.0).collect();
        let s = PeriodicPoisson::new(g).unwrap();
        let back = s.neg_laplacian(&s.solve(&rho).unwrap().phi);
        let mean = rho.iter().sum::<f64>() / rho.len() as f64;
        for (a, b) in back.iter().zip(&rho) {
            assert!((a - (b - mean)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_dirichlet_grid() {
        let g = Grid2D::new((0.0, 1.0), 8, (0.0, 1.0), 8, BoundaryKind::Zero, BoundaryKind::Zero).unwrap();
        assert!(PeriodicPoisson::new(g).is_err());
    }

    #[test]
    fn gauss_cosine_density() {
        let n = 64;
        let l = 2.0 * 2f64.sqrt() * PI;
        let dx = l / n as f64;
        let kx = 2.0 * PI / l;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * dx).collect();
        let rho: Vec<f64> = x.iter().map(|x| 1.0 + 0.1 * (kx * x).cos()).collect();
        let ex = gauss_ex(&rho, l);
        for (e, x) in ex.iter().zip(&x) {
            assert!((e - 0.1 / kx * (kx * x).sin()).abs() < 1e-10);
        }
        assert!(gauss_ex(&vec![2.0; n], l).iter().all(|e| e.abs() < 1e-15));
    }
}
