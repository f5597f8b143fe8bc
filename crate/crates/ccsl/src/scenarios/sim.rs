use ccsl_core::bsl::{bsl_step, PointMap};
use ccsl_core::cascade2d::{ccsl_step, validity_check, CcslOptions, CornerMap, ValidityReport};
use ccsl_core::characteristics::{
    backtrack, backtrack_point, GriddedVelocity, Rotation, RvmForce, Scheme, Swirling, TrajectoryOptions, VelocityField,
};
use ccsl_core::fields::{
    e_perp_from_phi, modified_source, moments, periodic_derivative, poisson_dirichlet, ElectricField2D, MaxwellState,
    SourceParams,
};
use ccsl_core::grid::init_cell_averages;
use ccsl_core::split::{split_step, SplitFlavor};
use ccsl_core::{CellField, Grid2D};

use super::init::{initial_field, rotation_bump, swirling_discontinuous, RvmParams, INIT_QUADRATURE};
use super::{ExMode, Method, Model, Predictor, ScenarioConfig};
use crate::error::RunError;
use crate::spectral::{GaussSolver, PeriodicPoisson};

/// Departure from the initial bounds, relative to their scale, that marks a
/// run as unstable.
pub const UNSTABLE_THRESHOLD: f64 = 1e-3;
/// Departure that aborts a run.
pub const ABORT_THRESHOLD: f64 = 0.5;

/// What one step observed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub time: f64,
    pub validity: Option<ValidityReport>,
    /// `max(f_min - min f, max f - f_max, 0)` over the bound scale.
    pub departure: f64,
    /// `max |Eₓ - Eₓ^Gauss|` of the relativistic model.
    pub gauss_residual: Option<f64>,
}

#[allow(clippy::large_enum_variant)]
enum FieldSolver {
    Dirichlet,
    Periodic { poisson: PeriodicPoisson, source: Option<SourceParams> },
}

impl FieldSolver {
    fn e_perp(&self, f: &CellField) -> Result<ElectricField2D, RunError> {
        let phi = match self {
            FieldSolver::Dirichlet => poisson_dirichlet(f)?,
            FieldSolver::Periodic { poisson, source } => match source {
                Some(p) => poisson.solve_field(&modified_source(f, p))?,
                None => poisson.solve_field(f)?,
            },
        };
        Ok(e_perp_from_phi(&phi))
    }
}

struct RvmState {
    em: MaxwellState,
    gauss: GaussSolver,
}

#[allow(clippy::large_enum_variant)]
enum Dynamics {
    Rotation(Rotation),
    Swirling(Swirling),
    GuidingCenter(FieldSolver),
    Rvm(Box<RvmState>),
}

/// One scenario in flight.
pub struct Simulation {
    pub config: ScenarioConfig,
    pub grid: Grid2D,
    pub f: CellField,
    pub steps_done: usize,
    /// Range of the initial cell averages.
    pub bounds: (f64, f64),
    /// First time the departure exceeded [`UNSTABLE_THRESHOLD`].
    pub unstable_since: Option<f64>,
    dynamics: Dynamics,
    options: CcslOptions,
}

impl Simulation {
    pub fn new(config: ScenarioConfig) -> Result<Self, RunError> {
        config.validate()?;
        let grid = config.grid()?;
        let f = initial_field(config.model, grid, config.dt);
        let bounds = (f.min(), f.max());
        let options = config.ccsl_options(bounds.0, bounds.1)?;
        let dynamics = match config.model {
            Model::Rotation => Dynamics::Rotation(Rotation::default()),
            Model::Swirling | Model::SwirlingDiscontinuous => Dynamics::Swirling(Swirling::default()),
            Model::Diocotron => Dynamics::GuidingCenter(FieldSolver::Dirichlet),
            Model::ModifiedGcUniform | Model::ModifiedGcVortex => {
                let source = SourceParams::new(10.0, 0.8, 0.1, grid.x.length(), grid.y.length())?;
                Dynamics::GuidingCenter(FieldSolver::Periodic { poisson: PeriodicPoisson::new(grid)?, source: Some(source) })
            }
            Model::Rvm => {
                let mut em = RvmParams::new(grid.dx(), config.dt).maxwell_state(&grid, config.dt);
                let gauss = GaussSolver::new(grid.nx(), grid.x.length());
                let m = moments(&f, &em.a_squared())?;
                em.ex = gauss.solve(&m.density, mean(&m.density));
                Dynamics::Rvm(Box::new(RvmState { em, gauss }))
            }
        };
        Ok(Self { config, grid, f, steps_done: 0, bounds, unstable_since: None, dynamics, options })
    }

    pub fn time(&self) -> f64 {
        self.f.time
    }

    pub fn is_finished(&self) -> bool {
        self.steps_done >= self.config.steps()
    }

    /// Transverse fields of the relativistic model.
    pub fn maxwell(&self) -> Option<&MaxwellState> {
        match &self.dynamics {
            Dynamics::Rvm(s) => Some(&s.em),
            _ => None,
        }
    }

    /// Electrostatic energy `½∬|E⊥|²` for the guiding-centre models, kinetic
    /// plus field energy for the relativistic model, zero otherwise.
    pub fn energy(&self) -> Result<f64, RunError> {
        match &self.dynamics {
            Dynamics::Rotation(_) | Dynamics::Swirling(_) => Ok(0.0),
            Dynamics::GuidingCenter(s) => Ok(s.e_perp(&self.f)?.energy()),
            Dynamics::Rvm(s) => {
                let m = moments(&self.f, &s.em.a_squared())?;
                Ok(m.kinetic.iter().sum::<f64>() * self.grid.dx() + s.em.energy())
            }
        }
    }

    /// Exact cell averages at the current time for the linear tests.
    pub fn exact_solution(&self) -> Option<CellField> {
        let t = self.time();
        let g = self.grid;
        let f0: fn(f64, f64) -> f64 = match self.config.model {
            Model::Rotation | Model::Swirling => rotation_bump,
            Model::SwirlingDiscontinuous => swirling_discontinuous,
            _ => return None,
        };
        let mut exact = match &self.dynamics {
            Dynamics::Rotation(r) => init_cell_averages(
                g,
                |x, y| {
                    let (a, b) = r.foot(x, y, t);
                    f0(a, b)
                },
                INIT_QUADRATURE,
            ),
            Dynamics::Swirling(s) => {
                // The flow is an autonomous field run for the pseudo-time.
                let tau = s.pseudo_time(t);
                let shape = |x: f64, y: f64, _t: f64| Swirling::shape(x, y);
                let substeps = ((tau.abs() / 0.02).ceil() as usize).max(1);
                let opts = TrajectoryOptions { scheme: Scheme::Rk4, substeps };
                init_cell_averages(
                    g,
                    |x, y| {
                        let (a, b) = backtrack_point(&shape, x, y, tau, tau, opts);
                        f0(a, b)
                    },
                    3,
                )
            }
            _ => return None,
        };
        exact.time = t;
        Some(exact)
    }

    fn step_size(&self) -> f64 {
        let t = self.time();
        self.config.dt.min(self.config.t_end - t)
    }

    /// Advances one step. On error the state is left at the last good step.
    pub fn step(&mut self) -> Result<StepReport, RunError> {
        let t = self.time();
        let dt = self.step_size();
        let t_next = if self.steps_done + 1 == self.config.steps() {
            self.config.t_end
        } else {
            (self.steps_done + 1) as f64 * self.config.dt
        };
        let abort = |reason: String| RunError::numerical(t, reason);
        let (mut next, validity, residual) = match &mut self.dynamics {
            Dynamics::Rotation(r) => {
                let r = *r;
                let exact = move |x: f64, y: f64| r.foot(x, y, dt);
                let v = self.validity(&r, t, dt);
                let traj = TrajectoryOptions::new(Scheme::Rk4, self.config.substeps)?;
                (transport(&self.f, &r, t, dt, self.config.method, &self.options, traj, Some(&exact))?, v, None)
            }
            Dynamics::Swirling(s) => {
                let s = *s;
                let v = self.validity(&s, t, dt);
                let traj = TrajectoryOptions::new(Scheme::Rk4, self.config.substeps)?;
                (transport(&self.f, &s, t, dt, self.config.method, &self.options, traj, None)?, v, None)
            }
            Dynamics::GuidingCenter(solver) => {
                let (next, v) = guiding_center_step(&self.f, solver, t, dt, &self.config, &self.options)?;
                (next, v, None)
            }
            Dynamics::Rvm(state) => {
                let (next, v, r) = rvm_step(&self.f, state, t, dt, &self.config, &self.options)?;
                (next, v, Some(r))
            }
        };
        if let Some(v) = validity {
            if self.config.method.is_cascade() && !v.ok() {
                return Err(abort(format!(
                    "cascade validity bound violated: ratio_x = {:.3}, ratio_y = {:.3}",
                    v.ratio_x, v.ratio_y
                )));
            }
        }
        if !next.is_finite() {
            return Err(abort("non-finite density".into()));
        }
        let departure = self.departure(&next);
        if departure > ABORT_THRESHOLD {
            return Err(abort(format!("density left its initial range by {departure:.3e} of the scale")));
        }
        next.time = t_next;
        if departure > UNSTABLE_THRESHOLD && self.unstable_since.is_none() {
            self.unstable_since = Some(t_next);
        }
        self.f = next;
        self.steps_done += 1;
        Ok(StepReport { time: t_next, validity, departure, gauss_residual: residual })
    }

    fn validity<V: VelocityField + ?Sized>(&self, field: &V, t: f64, dt: f64) -> Option<ValidityReport> {
        self.config.method.is_cascade().then(|| sampled_validity(&self.grid, field, t + 0.5 * dt, dt))
    }

    fn departure(&self, f: &CellField) -> f64 {
        let (lo, hi) = self.bounds;
        let scale = hi.abs().max(lo.abs()).max(hi - lo).max(f64::MIN_POSITIVE);
        let under = lo - f.min();
        let over = f.max() - hi;
        under.max(over).max(0.0) / scale
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sampled_validity<V: VelocityField + ?Sized>(g: &Grid2D, field: &V, t: f64, dt: f64) -> ValidityReport {
    let mut ax = Vec::with_capacity(g.len());
    let mut ay = Vec::with_capacity(g.len());
    for j in 0..g.ny() {
        let y = g.y.center(j as isize);
        for i in 0..g.nx() {
            let (u, v) = field.velocity(g.x.center(i as isize), y, t);
            ax.push(u);
            ay.push(v);
        }
    }
    validity_check(&ax, &ay, g.nx(), g.ny(), g.dx(), g.dy(), dt)
}

/// One transport step of `f` from `t` to `t + dt` with the given method.
/// `exact` replaces numerical backtracking when the foot is known.
#[allow(clippy::too_many_arguments)]
fn transport<V: VelocityField + ?Sized>(
    f: &CellField,
    field: &V,
    t: f64,
    dt: f64,
    method: Method,
    options: &CcslOptions,
    traj: TrajectoryOptions,
    exact: Option<&dyn Fn(f64, f64) -> (f64, f64)>,
) -> Result<CellField, RunError> {
    let g = f.grid;
    let foot = |x: f64, y: f64| match exact {
        Some(e) => e(x, y),
        None => backtrack_point(field, x, y, t + dt, dt, traj),
    };
    let out = match method {
        Method::Ccsl | Method::CcslImproved => {
            let corners = match exact {
                Some(e) => CornerMap::from_fn(&g, e),
                None => backtrack(&g, field, t + dt, dt, traj),
            };
            ccsl_step(f, &corners, options)?
        }
        Method::Bsl => bsl_step(f, &PointMap::from_fn(&g, foot), options.degree)?,
        Method::SplitCsl => split_step(f, field, t, dt, SplitFlavor::Csl, options.degree, traj)?,
        Method::SplitBsl => split_step(f, field, t, dt, SplitFlavor::Bsl, options.degree, traj)?,
    };
    Ok(out)
}

fn midpoint() -> TrajectoryOptions {
    TrajectoryOptions { scheme: Scheme::Rk2, substeps: 1 }
}

fn predictor_method(config: &ScenarioConfig) -> Method {
    match config.predictor {
        Predictor::Bsl => Method::Bsl,
        Predictor::Method => config.method,
    }
}

fn gridded(e: ElectricField2D) -> GriddedVelocity {
    GriddedVelocity { grid: e.grid, ux: e.ex, uy: e.ey }
}

/// Field at `tₙ`, half-step predictor, field at the predicted state, full
/// step of `fⁿ` in the predicted field.
fn guiding_center_step(
    f: &CellField,
    solver: &FieldSolver,
    t: f64,
    dt: f64,
    config: &ScenarioConfig,
    options: &CcslOptions,
) -> Result<(CellField, Option<ValidityReport>), RunError> {
    let e_n = gridded(solver.e_perp(f)?);
    let f_star = transport(f, &e_n, t, 0.5 * dt, predictor_method(config), options, midpoint(), None)?;
    let e_star = gridded(solver.e_perp(&f_star)?);
    let validity = config.method.is_cascade().then(|| sampled_validity(&f.grid, &e_star, t, dt));
    if let Some(v) = validity {
        if !v.ok() {
            return Ok((f.clone(), validity));
        }
    }
    let next = transport(f, &e_star, t, dt, config.method, options, midpoint(), None)?;
    Ok((next, validity))
}

/// Leapfrog fields, then a predictor-corrector phase-space step in the
/// force at `t + Δt/2`.
fn rvm_step(
    f: &CellField,
    state: &mut RvmState,
    t: f64,
    dt: f64,
    config: &ScenarioConfig,
    options: &CcslOptions,
) -> Result<(CellField, Option<ValidityReport>, f64), RunError> {
    let g = f.grid;
    let dx = g.dx();
    let a2_n = state.em.a_squared();
    let m_n = moments(f, &a2_n)?;
    let force_n = RvmForce { axis: g.x, ex: state.em.ex.clone(), da2: periodic_derivative(&a2_n, dx), a2: a2_n };

    let mut em = state.em.clone();
    em.step(&m_n.rho_gamma, dt)?;
    let a2_half: Vec<f64> = (0..g.nx())
        .map(|i| {
            let ay = 0.5 * (state.em.ay[i] + em.ay[i]);
            let az = 0.5 * (state.em.az[i] + em.az[i]);
            ay * ay + az * az
        })
        .collect();

    let f_star = transport(f, &force_n, t, 0.5 * dt, predictor_method(config), options, midpoint(), None)?;
    let j_star = moments(&f_star, &a2_half)?.current;
    let ex_half: Vec<f64> = match config.ex_mode {
        ExMode::Ampere => state.em.ex.iter().zip(&j_star).map(|(e, j)| e - 0.5 * dt * j).collect(),
        ExMode::Gauss => {
            let n = moments(&f_star, &a2_half)?.density;
            state.gauss.solve(&n, mean(&n))
        }
    };
    let force_half = RvmForce { axis: g.x, ex: ex_half, da2: periodic_derivative(&a2_half, dx), a2: a2_half };
    let validity = config.method.is_cascade().then(|| sampled_validity(&g, &force_half, t, dt));
    if let Some(v) = validity {
        if !v.ok() {
            return Ok((f.clone(), validity, 0.0));
        }
    }
    let next = transport(f, &force_half, t, dt, config.method, options, midpoint(), None)?;

    let density = moments(&next, &em.a_squared())?.density;
    let ex_gauss = state.gauss.solve(&density, mean(&density));
    em.ex = match config.ex_mode {
        ExMode::Ampere => state.em.ex.iter().zip(&j_star).map(|(e, j)| e - dt * j).collect(),
        ExMode::Gauss => ex_gauss.clone(),
    };
    let residual = em.ex.iter().zip(&ex_gauss).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    state.em = em;
    Ok((next, validity, residual))
}
