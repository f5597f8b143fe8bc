//! Run files in TOML, embedded presets and command-line overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::RunError;
use crate::scenarios::{ExMode, Method, Model, Predictor, ScenarioConfig};

const PRESETS: &[(&str, &str)] = &[
    ("rotation", include_str!("../presets/rotation.toml")),
    ("swirling", include_str!("../presets/swirling.toml")),
    ("swirling_discontinuous", include_str!("../presets/swirling_discontinuous.toml")),
    ("diocotron", include_str!("../presets/diocotron.toml")),
    ("modified_gc_uniform", include_str!("../presets/modified_gc_uniform.toml")),
    ("modified_gc_vortex", include_str!("../presets/modified_gc_vortex.toml")),
    ("rvm", include_str!("../presets/rvm.toml")),
    ("rvm_full", include_str!("../presets/rvm_full.toml")),
    ("table1", include_str!("../presets/table1.toml")),
    ("table2", include_str!("../presets/table2.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// Mesh given as `N`, `"N"` or `"NXxNY"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MeshRepr", into = "String")]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MeshRepr {
    Square(usize),
    Text(String),
}

impl TryFrom<MeshRepr> for Mesh {
    type Error = RunError;

    fn try_from(r: MeshRepr) -> Result<Self, RunError> {
        match r {
            MeshRepr::Square(n) => Ok(Mesh { nx: n, ny: n }),
            MeshRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Mesh> for String {
    fn from(m: Mesh) -> String {
        format!("{}x{}", m.nx, m.ny)
    }
}

impl std::str::FromStr for Mesh {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, RunError> {
        let bad = || RunError::Config(format!("mesh '{s}' is not of the form N or NXxNY"));
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        match s.split_once(['x', 'X']) {
            Some((a, b)) => Ok(Mesh { nx: num(a)?, ny: num(b)? }),
            None => {
                let n = num(s)?;
                Ok(Mesh { nx: n, ny: n })
            }
        }
    }
}

/// Scenario settings; anything left out falls back to the model defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub model: Option<Model>,
    pub method: Option<Method>,
    pub mesh: Option<Mesh>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub degree: Option<usize>,
    pub limiter: Option<bool>,
    pub freestream: Option<bool>,
    pub ex_mode: Option<ExMode>,
    pub predictor: Option<Predictor>,
    pub substeps: Option<usize>,
}

impl ScenarioSection {
    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: ScenarioSection) -> ScenarioSection {
        ScenarioSection {
            model: over.model.or(self.model),
            method: over.method.or(self.method),
            mesh: over.mesh.or(self.mesh),
            dt: over.dt.or(self.dt),
            t_end: over.t_end.or(self.t_end),
            degree: over.degree.or(self.degree),
            limiter: over.limiter.or(self.limiter),
            freestream: over.freestream.or(self.freestream),
            ex_mode: over.ex_mode.or(self.ex_mode),
            predictor: over.predictor.or(self.predictor),
            substeps: over.substeps.or(self.substeps),
        }
    }

    pub fn resolve(&self, snapshots: Option<&[f64]>) -> Result<ScenarioConfig, RunError> {
        let model = self.model.ok_or_else(|| RunError::Config("no model given".into()))?;
        let mut c = ScenarioConfig::new(model, self.method.unwrap_or(Method::CcslImproved));
        if let Some(m) = self.mesh {
            c = c.with_mesh(m.nx, m.ny);
        }
        let (dt, t_end) = (self.dt.unwrap_or(c.dt), self.t_end.unwrap_or(c.t_end));
        c = c.with_time(dt, t_end);
        c.snapshot_times = model.figure_times().iter().copied().filter(|t| *t <= t_end).collect();
        if let Some(d) = self.degree {
            c.degree = d;
        }
        if let Some(l) = self.limiter {
            c.limiter = l;
        }
        if let Some(f) = self.freestream {
            c.freestream = f;
        }
        if let Some(e) = self.ex_mode {
            c.ex_mode = e;
        }
        if let Some(p) = self.predictor {
            c.predictor = p;
        }
        if let Some(s) = self.substeps {
            c.substeps = s;
        }
        if let Some(s) = snapshots {
            c.snapshot_times = s.to_vec();
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotFormat {
    #[default]
    Csv,
    Binary,
    Both,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub snapshots: Option<Vec<f64>>,
    #[serde(default)]
    pub format: SnapshotFormat,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub meshes: Vec<usize>,
    #[serde(default)]
    pub reference_errors: Vec<f64>,
    #[serde(default)]
    pub reference_orders: Vec<f64>,
}

/// Contents of a run file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub output: OutputSection,
    pub sweep: Option<SweepSection>,
}

impl RunFile {
    pub fn parse(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn preset(name: &str) -> Result<Self, RunError> {
        match PRESETS.iter().find(|(n, _)| *n == name) {
            Some((_, text)) => Self::parse(text),
            None => {
                let known: Vec<&str> = preset_names().collect();
                Err(RunError::Config(format!("unknown preset '{name}', expected one of {}", known.join(", "))))
            }
        }
    }

    pub fn resolve(&self) -> Result<ScenarioConfig, RunError> {
        self.scenario.resolve(self.output.snapshots.as_deref())
    }
}
