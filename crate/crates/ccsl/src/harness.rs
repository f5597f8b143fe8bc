//! Run and sweep drivers: step a scenario, collect diagnostics, write files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ccsl_core::diagnostics::{convergence_orders, l2_error, record, ConvergenceReport, DiagnosticsSeries, Quantity};
use ccsl_core::CellField;
use serde::Serialize;

use crate::config::{SnapshotFormat, SweepSection};
use crate::error::RunError;
use crate::io::{snapshot_binary, snapshot_csv, write_atomic};
use crate::scenarios::{Method, Model, ScenarioConfig, Simulation};

/// Aggregates over one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    /// Against the exact cell averages, for models that have them.
    pub l2_error: Option<f64>,
    pub min_value: f64,
    pub max_value: f64,
    pub max_relative_mass_drift: f64,
    pub max_step_mass_drift: f64,
    pub max_relative_energy_deviation: f64,
    pub unstable_since: Option<f64>,
    /// Largest cascade validity ratios seen, `(x, y)`.
    pub max_validity_ratio: Option<(f64, f64)>,
    pub max_gauss_residual: Option<f64>,
    pub wall_clock_seconds: f64,
}

/// Outcome of [`simulate`]; `error` holds the abort, if any, and `last` the
/// last good state.
pub struct RunResult {
    pub summary: RunSummary,
    pub series: DiagnosticsSeries,
    pub last: CellField,
    pub error: Option<RunError>,
}

fn push(series: &mut DiagnosticsSeries, sim: &Simulation) -> Result<(), RunError> {
    Ok(series.push(record(&sim.f, sim.energy()?))?)
}

/// Steps a scenario to its end time in memory. `on_snapshot` sees the state
/// at the first step reaching each requested time.
pub fn simulate(
    config: &ScenarioConfig,
    mut on_snapshot: impl FnMut(f64, &CellField) -> Result<(), RunError>,
) -> Result<RunResult, RunError> {
    let start = Instant::now();
    let mut sim = Simulation::new(config.clone())?;
    let mut series = DiagnosticsSeries::new();
    push(&mut series, &sim)?;
    let mut pending: Vec<f64> = config.snapshot_times.iter().copied().filter(|t| *t <= config.t_end).collect();
    pending.sort_by(f64::total_cmp);
    pending.dedup();
    let tol = 1e-9 * config.dt;
    let mut take = |sim: &Simulation, pending: &mut Vec<f64>| -> Result<(), RunError> {
        while let Some(&t) = pending.first() {
            if t > sim.time() + tol {
                break;
            }
            on_snapshot(t, &sim.f)?;
            pending.remove(0);
        }
        Ok(())
    };
    take(&sim, &mut pending)?;
    let (mut lo, mut hi) = (sim.f.min(), sim.f.max());
    let mut validity: Option<(f64, f64)> = None;
    let mut residual: Option<f64> = None;
    let mut error = None;
    while !sim.is_finished() {
        match sim.step() {
            Ok(r) => {
                if let Some(v) = r.validity {
                    let (a, b) = validity.unwrap_or((0.0, 0.0));
                    validity = Some((a.max(v.ratio_x), b.max(v.ratio_y)));
                }
                if let Some(g) = r.gauss_residual {
                    residual = Some(residual.unwrap_or(0.0).max(g));
                }
            }
            Err(e) => {
                error = Some(e);
                break;
            }
        }
        lo = lo.min(sim.f.min());
        hi = hi.max(sim.f.max());
        push(&mut series, &sim)?;
        take(&sim, &mut pending)?;
    }
    let l2 = match sim.exact_solution() {
        Some(exact) => Some(l2_error(&sim.f, &exact)?),
        None => None,
    };
    let summary = RunSummary {
        steps: sim.steps_done,
        final_time: sim.time(),
        l2_error: l2,
        min_value: lo,
        max_value: hi,
        max_relative_mass_drift: series.max_relative_deviation(Quantity::Mass),
        max_step_mass_drift: series.max_step_deviation(Quantity::Mass),
        max_relative_energy_deviation: series.max_relative_deviation(Quantity::Energy),
        unstable_since: sim.unstable_since,
        max_validity_ratio: validity,
        max_gauss_residual: residual,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(RunResult { summary, series, last: sim.f, error })
}

/// Choices in effect that the numbers depend on.
#[derive(Debug, Clone, Serialize)]
pub struct DesignFlags {
    pub trajectories: &'static str,
    pub field_interpolation: &'static str,
    pub predictor: String,
    pub ex_mode: Option<String>,
    pub limiter: bool,
    pub freestream_correction: bool,
    pub energy: &'static str,
}

impl DesignFlags {
    pub fn of(c: &ScenarioConfig) -> Self {
        let trajectories = match c.model {
            Model::Rotation => "exact foot",
            Model::Swirling | Model::SwirlingDiscontinuous => "RK4 substeps",
            _ => "RK2 midpoint",
        };
        let energy = match c.model {
            Model::Rotation | Model::Swirling | Model::SwirlingDiscontinuous => "none",
            Model::Rvm => "kinetic (gamma - 1) f plus field energy",
            _ => "electrostatic 1/2 |E|^2",
        };
        Self {
            trajectories,
            field_interpolation: "bilinear",
            predictor: c.predictor.to_string(),
            ex_mode: (c.model == Model::Rvm).then(|| c.ex_mode.to_string()),
            limiter: c.limiter,
            freestream_correction: c.freestream,
            energy,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotEntry {
    pub requested: f64,
    pub time: f64,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: &'static str,
    pub status: &'static str,
    pub exit_code: i32,
    pub error: Option<String>,
    pub config: ScenarioConfig,
    pub design: DesignFlags,
    pub diagnostics: PathBuf,
    pub snapshots: Vec<SnapshotEntry>,
    pub summary: RunSummary,
}

fn write_snapshot(dir: &Path, stem: &str, f: &CellField, format: SnapshotFormat) -> Result<Vec<PathBuf>, RunError> {
    let mut files = Vec::new();
    if matches!(format, SnapshotFormat::Csv | SnapshotFormat::Both) {
        let p = dir.join(format!("{stem}.csv"));
        write_atomic(&p, snapshot_csv(f).as_bytes())?;
        files.push(p);
    }
    if matches!(format, SnapshotFormat::Binary | SnapshotFormat::Both) {
        let p = dir.join(format!("{stem}.bin"));
        write_atomic(&p, &snapshot_binary(f))?;
        files.push(p);
    }
    Ok(files)
}

/// Runs a scenario and writes `diagnostics.csv`, the snapshots and
/// `manifest.json` under `out`. A numerical abort still writes everything up
/// to the last good step, plus a `last_good` snapshot, before returning the
/// error.
pub fn run(config: &ScenarioConfig, out: &Path, format: SnapshotFormat) -> Result<(RunManifest, RunResult), RunError> {
    std::fs::create_dir_all(out).map_err(|e| RunError::io(out, e))?;
    let mut snapshots = Vec::new();
    let mut result = simulate(config, |t, f| {
        let files = write_snapshot(out, &format!("snapshot_t{t:.6}"), f, format)?;
        snapshots.push(SnapshotEntry { requested: t, time: f.time, files });
        Ok(())
    })?;
    let diagnostics = out.join("diagnostics.csv");
    write_atomic(&diagnostics, result.series.to_csv().as_bytes())?;
    if result.error.is_some() {
        let files = write_snapshot(out, "last_good", &result.last, format)?;
        snapshots.push(SnapshotEntry { requested: result.last.time, time: result.last.time, files });
    }
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION"),
        status: if result.error.is_some() { "aborted" } else { "completed" },
        exit_code: result.error.as_ref().map_or(0, RunError::exit_code),
        error: result.error.as_ref().map(ToString::to_string),
        config: config.clone(),
        design: DesignFlags::of(config),
        diagnostics,
        snapshots,
        summary: result.summary.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&out.join("manifest.json"), json.as_bytes())?;
    match result.error.take() {
        Some(e) => Err(e),
        None => Ok((manifest, result)),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub mesh: usize,
    pub l2_error: Option<f64>,
    pub error: Option<String>,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct SweepResult {
    pub model: Model,
    pub method: Method,
    pub rows: Vec<SweepRow>,
    /// Present when every mesh completed.
    pub report: Option<ConvergenceReport>,
    pub reference_errors: Vec<f64>,
    pub reference_orders: Vec<f64>,
    /// First failed run, if any.
    #[serde(skip)]
    pub failure: Option<RunError>,
}

impl SweepResult {
    pub fn all_ok(&self) -> bool {
        self.report.is_some()
    }

    pub fn to_table(&self) -> String {
        let ref_orders: Vec<Option<f64>> = std::iter::once(None).chain(self.reference_orders.iter().copied().map(Some)).collect();
        if let Some(r) = &self.report {
            let reference = (!self.reference_errors.is_empty() || !self.reference_orders.is_empty())
                .then_some((self.reference_errors.as_slice(), ref_orders.as_slice()));
            return r.to_table(reference);
        }
        let mut s = format!("{:>8}  {:>12}\n", "mesh", "L2 error");
        for row in &self.rows {
            let mesh = format!("{0}x{0}", row.mesh);
            match (&row.l2_error, &row.error) {
                (_, Some(e)) => {
                    let _ = writeln!(s, "{mesh:>8}  failed: {e}");
                }
                (Some(v), None) => {
                    let _ = writeln!(s, "{mesh:>8}  {v:>12.3e}");
                }
                (None, None) => {
                    let _ = writeln!(s, "{mesh:>8}  {:>12}", "-");
                }
            }
        }
        s
    }
}

/// Runs `base` on each square mesh of `sweep` and measures the observed
/// orders. Writes `convergence.txt` and `convergence.json` when `out` is given.
pub fn sweep(base: &ScenarioConfig, sweep: &SweepSection, out: Option<&Path>) -> Result<SweepResult, RunError> {
    if sweep.meshes.is_empty() {
        return Err(RunError::Config("sweep needs at least one mesh".into()));
    }
    if !matches!(base.model, Model::Rotation | Model::Swirling | Model::SwirlingDiscontinuous) {
        return Err(RunError::Config(format!("{} has no exact solution to measure errors against", base.model)));
    }
    if sweep.meshes.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(RunError::Config("sweep meshes must double from one to the next".into()));
    }
    let configs: Vec<ScenarioConfig> = sweep
        .meshes
        .iter()
        .map(|&n| {
            let mut c = base.clone().with_mesh(n, n);
            c.snapshot_times.clear();
            c.validate().map(|_| c)
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    let mut failure = None;
    for (c, &n) in configs.iter().zip(&sweep.meshes) {
        let start = Instant::now();
        let (l2, error) = match simulate(c, |_, _| Ok(())).and_then(|r| r.error.map_or(Ok(r.summary.l2_error), Err)) {
            Ok(l2) => (l2, None),
            Err(e) => {
                let text = e.to_string();
                failure.get_or_insert(e);
                (None, Some(text))
            }
        };
        rows.push(SweepRow { mesh: n, l2_error: l2, error, wall_clock_seconds: start.elapsed().as_secs_f64() });
    }
    let errors: Option<Vec<f64>> = rows.iter().map(|r| r.l2_error).collect();
    let report = match errors {
        Some(e) if e.len() >= 2 => Some(convergence_orders(&sweep.meshes, &e)?),
        _ => None,
    };
    let result = SweepResult {
        model: base.model,
        method: base.method,
        rows,
        report,
        reference_errors: sweep.reference_errors.clone(),
        reference_orders: sweep.reference_orders.clone(),
        failure,
    };
    if let Some(dir) = out {
        write_atomic(&dir.join("convergence.txt"), result.to_table().as_bytes())?;
        let json = serde_json::to_string_pretty(&result).expect("report serializes");
        write_atomic(&dir.join("convergence.json"), json.as_bytes())?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(model: Model, method: Method) -> ScenarioConfig {
        ScenarioConfig::new(model, method).with_mesh(32, 32).with_time(0.25, 0.5)
    }

    #[test]
    fn snapshots_hit_requested_times() {
        let mut c = small(Model::Rotation, Method::Ccsl);
        c.snapshot_times = vec![0.0, 0.3, 0.5, 9.0];
        let mut seen = Vec::new();
        let r = simulate(&c, |t, f| {
            seen.push((t, f.time));
            Ok(())
        })
        .unwrap();
        assert!(r.error.is_none());
        assert_eq!(seen, vec![(0.0, 0.0), (0.3, 0.5), (0.5, 0.5)]);
        assert_eq!(r.series.len(), 3);
        assert!(r.summary.l2_error.unwrap() > 0.0);
    }

    #[test]
    fn run_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let c = small(Model::Rotation, Method::Ccsl);
        let (m, _) = run(&c, dir.path(), SnapshotFormat::Both).unwrap();
        assert_eq!(m.status, "completed");
        assert!(dir.path().join("diagnostics.csv").exists());
        assert!(dir.path().join("manifest.json").exists());
        assert!(m.snapshots.iter().all(|s| s.files.iter().all(|f| f.exists())));
    }

    #[test]
    fn sweep_rejects_bad_mesh_lists() {
        let c = small(Model::Rotation, Method::Ccsl);
        let s = |m: Vec<usize>| SweepSection { meshes: m, ..Default::default() };
        assert!(matches!(sweep(&c, &s(vec![]), None), Err(RunError::Config(_))));
        assert!(matches!(sweep(&c, &s(vec![16, 24]), None), Err(RunError::Config(_))));
        let d = small(Model::Diocotron, Method::Bsl);
        assert!(sweep(&d, &s(vec![16, 32]), None).is_err());
    }

    #[test]
    fn sweep_reports_orders() {
        let c = small(Model::Rotation, Method::Ccsl);
        let s = SweepSection { meshes: vec![16, 32], ..Default::default() };
        let r = sweep(&c, &s, None).unwrap();
        assert!(r.all_ok());
        assert!(r.report.unwrap().orders[1].unwrap() > 1.0);
    }
}
