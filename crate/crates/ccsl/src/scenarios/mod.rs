//! Scenario definitions, initial data and the per-model time loops.

mod init;
mod sim;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ccsl_core::cascade2d::CcslOptions;
use ccsl_core::{BoundaryKind, Grid2D};
use serde::{Deserialize, Serialize};

use crate::error::RunError;

pub use init::{initial_field, rotation_bump, swirling_discontinuous, RvmParams};
pub use sim::{Simulation, StepReport};

macro_rules! named_enum {
    ($(#[$m:meta])* $name:ident { $($v:ident => $s:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name { $($v),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$v),+];

            pub fn as_str(&self) -> &'static str {
                match self { $($name::$v => $s),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = RunError;

            fn from_str(s: &str) -> Result<Self, RunError> {
                match s {
                    $($s => Ok($name::$v),)+
                    _ => {
                        let known: Vec<&str> = Self::ALL.iter().map(|v| v.as_str()).collect();
                        Err(RunError::Config(format!(
                            "unknown {} '{s}', expected one of {}",
                            stringify!($name).to_lowercase(),
                            known.join(", ")
                        )))
                    }
                }
            }
        }
    };
}

named_enum!(Model {
    Rotation => "rotation",
    Swirling => "swirling",
    SwirlingDiscontinuous => "swirling_discontinuous",
    Diocotron => "diocotron",
    ModifiedGcUniform => "modified_gc_uniform",
    ModifiedGcVortex => "modified_gc_vortex",
    Rvm => "rvm",
});

named_enum!(Method {
    Ccsl => "ccsl",
    CcslImproved => "ccsl_improved",
    Bsl => "bsl",
    SplitCsl => "split_csl",
    SplitBsl => "split_bsl",
});

named_enum!(ExMode {
    Gauss => "gauss",
    Ampere => "ampere",
});

named_enum!(
    /// Scheme of the half-step predictor in the field-driven models.
    Predictor {
        Bsl => "bsl",
        Method => "method",
    }
);

impl Method {
    pub fn is_cascade(&self) -> bool {
        matches!(self, Method::Ccsl | Method::CcslImproved)
    }

    pub fn is_conservative(&self) -> bool {
        matches!(self, Method::Ccsl | Method::CcslImproved | Method::SplitCsl)
    }
}

impl Model {
    pub fn grid(&self, nx: usize, ny: usize) -> Result<Grid2D, RunError> {
        use BoundaryKind::{Periodic, Zero};
        let g = match self {
            Model::Rotation | Model::Swirling | Model::SwirlingDiscontinuous => {
                Grid2D::new((-PI, PI), nx, (-PI, PI), ny, Zero, Zero)
            }
            Model::Diocotron => Grid2D::new((-15.0, 15.0), nx, (-15.0, 15.0), ny, Zero, Zero),
            Model::ModifiedGcUniform | Model::ModifiedGcVortex => {
                Grid2D::new((0.0, 16.0), nx, (0.0, 8.0), ny, Periodic, Periodic)
            }
            Model::Rvm => Grid2D::new((0.0, 2.0 * 2f64.sqrt() * PI), nx, (-2.5, 2.5), ny, Periodic, Zero),
        };
        Ok(g?)
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Model::ModifiedGcUniform | Model::ModifiedGcVortex)
    }

    /// Mesh, time step and end time used when nothing else is given.
    pub fn defaults(&self) -> (usize, usize, f64, f64) {
        match self {
            Model::Rotation => (160, 160, 0.25, 1.0),
            Model::Swirling => (160, 160, 0.125, 1.0),
            Model::SwirlingDiscontinuous => (160, 160, 0.03125, 2.0),
            Model::Diocotron => (256, 256, 1.0, 100.0),
            Model::ModifiedGcUniform => (128, 64, 1.0, 40.0),
            Model::ModifiedGcVortex => (256, 128, 1.0, 120.0),
            Model::Rvm => (128, 128, 0.02, 10.0),
        }
    }

    /// Default snapshot times.
    pub fn figure_times(&self) -> &'static [f64] {
        match self {
            Model::Rotation | Model::Swirling => &[1.0],
            Model::SwirlingDiscontinuous => &[1.0, 2.0],
            Model::Diocotron => &[10.0, 30.0, 50.0, 100.0],
            Model::ModifiedGcUniform => &[20.0, 30.0, 35.0, 38.0],
            Model::ModifiedGcVortex => &[10.0, 50.0, 80.0, 90.0, 110.0],
            Model::Rvm => &[5.0, 10.0, 17.0, 20.0, 30.0],
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub model: Model,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub t_end: f64,
    pub method: Method,
    /// Half-degree `d`; reconstructions use degree `2d + 1`.
    pub degree: usize,
    pub limiter: bool,
    pub freestream: bool,
    pub ex_mode: ExMode,
    pub predictor: Predictor,
    /// RK4 substeps per step for analytic flows without a closed-form foot.
    pub substeps: usize,
    pub snapshot_times: Vec<f64>,
}

impl ScenarioConfig {
    /// Default parameters of a model with the given method.
    pub fn new(model: Model, method: Method) -> Self {
        let (nx, ny, dt, t_end) = model.defaults();
        Self {
            model,
            nx,
            ny,
            dt,
            t_end,
            method,
            degree: 2,
            limiter: method == Method::CcslImproved,
            freestream: method == Method::CcslImproved,
            ex_mode: ExMode::Ampere,
            predictor: Predictor::Bsl,
            substeps: 8,
            snapshot_times: model.figure_times().iter().copied().filter(|t| *t <= t_end).collect(),
        }
    }

    pub fn with_mesh(mut self, nx: usize, ny: usize) -> Self {
        self.nx = nx;
        self.ny = ny;
        self
    }

    pub fn with_time(mut self, dt: f64, t_end: f64) -> Self {
        self.dt = dt;
        self.t_end = t_end;
        self.snapshot_times.retain(|t| *t <= t_end);
        self
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |m: String| Err(RunError::Config(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if self.degree > 4 {
            return bad(format!("degree {} exceeds the supported maximum 4", self.degree));
        }
        let need = 2 * self.degree + 2;
        if self.nx < need || self.ny < need {
            return bad(format!("mesh {}x{} is smaller than the {need}-cell stencil", self.nx, self.ny));
        }
        if self.substeps == 0 {
            return bad("substeps must be at least 1".into());
        }
        if !self.method.is_cascade() && (self.limiter || self.freestream) {
            return bad(format!("limiter and freestream correction apply to cascade methods, not {}", self.method));
        }
        if self.model == Model::Rvm && !self.nx.is_multiple_of(2) {
            return bad("the relativistic model needs an even number of x cells".into());
        }
        if self.snapshot_times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return bad("snapshot times must be finite and non-negative".into());
        }
        self.model.grid(self.nx, self.ny)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid2D, RunError> {
        self.model.grid(self.nx, self.ny)
    }

    /// Number of steps; the last one is shortened when `dt` does not divide `t_end`.
    pub fn steps(&self) -> usize {
        let r = self.t_end / self.dt;
        let n = r.round();
        if (r - n).abs() <= 1e-9 * r.max(1.0) {
            n as usize
        } else {
            r.ceil() as usize
        }
    }

    pub fn ccsl_options(&self, f_min: f64, f_max: f64) -> Result<CcslOptions, RunError> {
        let mut o = if self.limiter {
            CcslOptions::improved(self.degree, f_min, f_max)?
        } else {
            CcslOptions { degree: self.degree, ..CcslOptions::default() }
        };
        o.freestream_correction = self.freestream;
        Ok(o)
    }
}
