use std::path::PathBuf;
use std::process::ExitCode;

use ccsl::config::{preset_names, Mesh, RunFile, ScenarioSection, SnapshotFormat, SweepSection};
use ccsl::harness;
use ccsl::scenarios::{ExMode, Method, Model, Predictor};
use ccsl::RunError;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ccsl", version, about = "Conservative cascade semi-Lagrangian transport runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write diagnostics, snapshots and a manifest.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Snapshot times, comma separated.
        #[arg(long, value_delimiter = ',')]
        snapshots: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one scenario on a sequence of doubled meshes and report orders.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Square mesh sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        meshes: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Built-in preset to start from.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// TOML run file to start from.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model name; overrides the preset or file.
    #[arg(long)]
    scenario: Option<Model>,
    /// `N` or `NXxNY`.
    #[arg(long)]
    mesh: Option<Mesh>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    method: Option<Method>,
    /// Half-degree `d` of the reconstructions.
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long, value_enum)]
    limiter: Option<Switch>,
    #[arg(long, value_enum)]
    freestream: Option<Switch>,
    #[arg(long)]
    ex_mode: Option<ExMode>,
    #[arg(long)]
    predictor: Option<Predictor>,
    #[arg(long)]
    substeps: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Binary,
    Both,
}

impl ScenarioArgs {
    fn load(&self) -> Result<RunFile, RunError> {
        let mut file = match (&self.preset, &self.config) {
            (Some(p), _) => RunFile::preset(p)?,
            (None, Some(path)) => RunFile::load(path)?,
            (None, None) => RunFile::default(),
        };
        let on = |s: Option<Switch>| s.map(|s| matches!(s, Switch::On));
        let over = ScenarioSection {
            model: self.scenario,
            method: self.method,
            mesh: self.mesh,
            dt: self.dt,
            t_end: self.t_end,
            degree: self.degree,
            limiter: on(self.limiter),
            freestream: on(self.freestream),
            ex_mode: self.ex_mode,
            predictor: self.predictor,
            substeps: self.substeps,
        };
        // A model switch drops the starting point's method-specific settings.
        if self.scenario.is_some() && self.scenario != file.scenario.model {
            file = RunFile::default();
        }
        file.scenario = std::mem::take(&mut file.scenario).merge(over);
        Ok(file)
    }
}

fn execute(command: Command) -> Result<(), RunError> {
    match command {
        Command::Presets => {
            for name in preset_names() {
                println!("{name}");
            }
            Ok(())
        }
        Command::Run { scenario, snapshots, format, out } => {
            let mut file = scenario.load()?;
            if snapshots.is_some() {
                file.output.snapshots = snapshots;
            }
            if let Some(f) = format {
                file.output.format = match f {
                    FormatArg::Csv => SnapshotFormat::Csv,
                    FormatArg::Binary => SnapshotFormat::Binary,
                    FormatArg::Both => SnapshotFormat::Both,
                };
            }
            let config = file.resolve()?;
            let (manifest, _) = harness::run(&config, &out, file.output.format)?;
            let s = &manifest.summary;
            println!(
                "{} with {} on {}x{}: {} steps to t = {}",
                config.model, config.method, config.nx, config.ny, s.steps, s.final_time
            );
            if let Some(e) = s.l2_error {
                println!("L2 error           {e:.6e}");
            }
            println!("mass drift         {:.3e}", s.max_relative_mass_drift);
            println!("range              [{:.6e}, {:.6e}]", s.min_value, s.max_value);
            if let Some(t) = s.unstable_since {
                println!("left initial range  t = {t} (by more than 1e-3 of its scale)");
            }
            println!("output             {}", out.display());
            Ok(())
        }
        Command::Sweep { scenario, meshes, out } => {
            let file = scenario.load()?;
            let mut sweep = file.sweep.clone().unwrap_or_else(|| SweepSection { meshes: Vec::new(), ..Default::default() });
            if let Some(m) = meshes {
                sweep.meshes = m;
                sweep.reference_errors.clear();
                sweep.reference_orders.clear();
            }
            if sweep.meshes.is_empty() {
                return Err(RunError::Config("no meshes given; use --meshes or a preset with a sweep".into()));
            }
            let config = file.resolve()?;
            if let Some(dir) = &out {
                std::fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
            }
            let mut result = harness::sweep(&config, &sweep, out.as_deref())?;
            print!("{}", result.to_table());
            result.failure.take().map_or(Ok(()), Err)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
