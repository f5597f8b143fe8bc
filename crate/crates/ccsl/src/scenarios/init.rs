use std::f64::consts::PI;

use ccsl_core::fields::MaxwellState;
use ccsl_core::grid::init_cell_averages;
use ccsl_core::{CellField, Grid2D};
use serde::{Deserialize, Serialize};

use super::Model;

const R0: f64 = 0.3 * PI;

/// Smooth bump of the linear tests, centred at `(0.3π, 0)`.
pub fn rotation_bump(x: f64, y: f64) -> f64 {
    let r = ((x - R0) * (x - R0) + y * y).sqrt();
    if r < R0 {
        R0 * (0.5 * PI * r / R0).cos().powi(6)
    } else {
        0.0
    }
}

/// Slotted disc, cone and cosine hill.
pub fn swirling_discontinuous(x: f64, y: f64) -> f64 {
    let r1 = (x * x + (y - 0.5 * PI).powi(2)).sqrt();
    let r2 = (x * x + (y + 0.5 * PI).powi(2)).sqrt();
    let r3 = ((x + 0.5 * PI).powi(2) + y * y).sqrt();
    if r1 <= R0 && (x.abs() >= 0.05 * PI || y >= 0.5 * PI) {
        1.0
    } else if r2 <= R0 {
        1.0 - r2 / R0
    } else if r3 <= R0 {
        0.25 * (1.0 + (PI * r3 / R0).cos())
    } else {
        0.0
    }
}

fn diocotron(x: f64, y: f64) -> f64 {
    let r = (x * x + y * y).sqrt();
    if (5.0..=8.0).contains(&r) {
        (1.0 + 0.1 * (6.0 * y.atan2(x)).cos()) * (-4.0 * (r - 6.5) * (r - 6.5)).exp()
    } else {
        0.0
    }
}

fn vortex(x: f64, _y: f64) -> f64 {
    let lx = 16.0;
    let t = 1.0 - lx / (74.0 * PI) * (2.0 * PI * x / lx).cos();
    1.0 / (2.0 * PI * t).sqrt()
}

/// Parameters of the circularly polarized wave in the relativistic model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RvmParams {
    pub k0: f64,
    pub ks: f64,
    pub p_osc: f64,
    pub gamma0: f64,
    pub omega_s: f64,
    pub omega0: f64,
    pub q: f64,
    pub v_th: f64,
    pub eps_perturb: f64,
}

impl RvmParams {
    pub fn new(dx: f64, dt: f64) -> Self {
        let k0 = 1.0 / 2f64.sqrt();
        let ks = 2.0 / dx * (0.5 * k0 * dx).sin();
        let p_osc = 3f64.sqrt();
        let gamma0 = (1.0 + p_osc * p_osc).sqrt();
        let omega_s = (1.0 / gamma0 + ks * ks).sqrt();
        let omega0 = 4.0 / dt * (0.25 * dt * omega_s).asin();
        Self { k0, ks, p_osc, gamma0, omega_s, omega0, q: p_osc * omega_s, v_th: (3.0 / 511.0f64).sqrt(), eps_perturb: 0.1 }
    }

    /// Perturbed Maxwellian in `(x, p)`.
    pub fn density(&self, x: f64, p: f64, lx: f64, dx: f64) -> f64 {
        let m = (-p * p / (2.0 * self.v_th * self.v_th)).exp() / ((2.0 * PI).sqrt() * self.v_th);
        m * (1.0 + self.eps_perturb * (2.0 * PI / lx * (x + dx)).cos())
    }

    /// Staggered fields: `E_y, E_z` at `-Δt/2`, the rest at `0`. `E_x` is
    /// left at zero for the caller.
    pub fn maxwell_state(&self, grid: &Grid2D, dt: f64) -> MaxwellState {
        let n = grid.nx();
        let dx = grid.dx();
        let mut s = MaxwellState::zeros(n, dx);
        let (q, w) = (self.q, self.omega_s);
        let b = self.ks * q / w;
        for i in 0..n {
            let xc = grid.x.center(i as isize);
            let xf = grid.x.face(i as isize + 1);
            let ph = self.k0 * xc + 0.5 * self.omega0 * dt;
            s.ey[i] = q * ph.cos();
            s.ez[i] = q * ph.sin();
            s.by[i] = -b * (self.k0 * xf).sin();
            s.bz[i] = b * (self.k0 * xf).cos();
            s.ay[i] = q / w * (self.k0 * xc).sin();
            s.az[i] = -q / w * (self.k0 * xc).cos();
        }
        s
    }
}

/// Gauss points per axis for initial cell averages.
pub(crate) const INIT_QUADRATURE: usize = 4;

/// Cell averages of the model's initial condition.
pub fn initial_field(model: Model, grid: Grid2D, dt: f64) -> CellField {
    match model {
        Model::Rotation | Model::Swirling => init_cell_averages(grid, rotation_bump, INIT_QUADRATURE),
        Model::SwirlingDiscontinuous => init_cell_averages(grid, swirling_discontinuous, INIT_QUADRATURE),
        Model::Diocotron => init_cell_averages(grid, diocotron, INIT_QUADRATURE),
        Model::ModifiedGcUniform => CellField::from_values(grid, vec![1.0; grid.len()], 0.0).expect("sized"),
        Model::ModifiedGcVortex => init_cell_averages(grid, vortex, INIT_QUADRATURE),
        Model::Rvm => {
            let p = RvmParams::new(grid.dx(), dt);
            let (lx, dx) = (grid.x.length(), grid.dx());
            init_cell_averages(grid, |x, v| p.density(x, v, lx, dx), INIT_QUADRATURE)
        }
    }
}
