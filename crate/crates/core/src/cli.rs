//! Command-line surface: `analyze`, `validate`, `sweep`, `optimize`, `estimate`.
//!
//! Exit codes: 0 success, 2 input error (unreadable or invalid scenario or
//! trace, bad flags), 3 validation breach (some relative error ≥ 1%),
//! 1 internal failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::analytics::analyze;
use crate::error::ModelError;
use crate::optimizer::{find_optimal, objective_profile};
use crate::report::{
    analysis_table, estimate_table, optimum_table, profile_table, sweep_table, validation_rows,
    validation_table, OutputFormat, ResultTable, Value,
};
use crate::scenario::{ScenarioError, ScenarioFile, SimulationSection};
use crate::simulator::{run_monte_carlo, CountingMode, SimConfig};
use crate::sweep::{run_sweep, SweepAxis, SweepRange};
use crate::trace::{estimate, TraceError, TraceLog};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BREACH: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "femto-offload",
    version,
    about = "Threshold offloading analytics, simulation and threshold optimization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Structured,
    Text,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Structured => OutputFormat::Structured,
            FormatArg::Text => OutputFormat::Text,
        }
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Overrides `simulation.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `simulation.replications`.
    #[arg(long, global = true)]
    pub replications: Option<u64>,
    /// Overrides `simulation.counting_mode` (paper | flowchart).
    #[arg(long, global = true)]
    pub mode: Option<CountingMode>,
    /// Overrides `simulation.batch_count`.
    #[arg(long, global = true)]
    pub batches: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every analytic quantity of a scenario.
    Analyze {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Analytic against simulated N_t, T_t, Θ, Λ; exit 3 if any error ≥ 1%.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Θ and Λ along one parameter axis.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        axis: SweepAxis,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Log-spaced grid.
        #[arg(long)]
        log: bool,
        /// Also simulate every point.
        #[arg(long)]
        simulate: bool,
    },
    /// Threshold maximizing Θ + Λ.
    Optimize {
        #[arg(long)]
        scenario: PathBuf,
        /// Also write a log-spaced objective profile with this many points.
        #[arg(long, requires = "profile_output")]
        profile_points: Option<usize>,
        #[arg(long)]
        profile_output: Option<PathBuf>,
    },
    /// Residence and session means from a handover trace.
    Estimate {
        #[arg(long)]
        trace: PathBuf,
        /// Write the suggested scenario file here.
        #[arg(long)]
        scenario_out: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Breach(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Breach(_) => EXIT_BREACH,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<TraceError> for CliError {
    fn from(e: TraceError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Domain { .. } | ModelError::Config(_) => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Input(format!("cannot write {}: {e}", path.display()))
}

fn load_scenario(path: &Path, common: &CommonArgs) -> Result<ScenarioFile, CliError> {
    let mut file = ScenarioFile::load(path)?;
    if common.seed.is_some()
        || common.replications.is_some()
        || common.mode.is_some()
        || common.batches.is_some()
    {
        let mut sim = file.simulation.take().unwrap_or_else(SimulationSection::default);
        if let Some(r) = common.replications {
            sim.replications = Some(r);
            sim.batch_count = None;
        }
        if let Some(s) = common.seed {
            sim.seed = Some(s);
        }
        if let Some(m) = common.mode {
            sim.counting_mode = Some(m);
        }
        if let Some(b) = common.batches {
            sim.batch_count = Some(b);
        }
        file.simulation = Some(sim);
    }
    Ok(file)
}

fn emit(table: &ResultTable, common: &CommonArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let format = common.format.into();
    match &common.output {
        Some(path) => {
            let f = File::create(path).map_err(|e| io_error(path, e))?;
            table.write(io::BufWriter::new(f), format).map_err(|e| io_error(path, e))
        }
        None => table
            .write(stdout, format)
            .map_err(|e| CliError::Internal(format!("cannot write output: {e}"))),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| io_error(path, e))
}

/// Runs one command; the result table goes to `--output` or `stdout`.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let common = &cli.common;
    match &cli.command {
        Command::Analyze { scenario } => {
            let p = load_scenario(scenario, common)?.params()?;
            let report = analyze(&p)?;
            emit(&analysis_table(&report), common, stdout)
        }
        Command::Validate { scenario } => {
            let file = load_scenario(scenario, common)?;
            let p = file.params()?;
            let cfg: SimConfig = file.simulation()?;
            let a = analyze(&p)?;
            let mc = run_monte_carlo(&p, &cfg)?;
            emit(&validation_table(&a, &mc), common, stdout)?;
            let failed: Vec<&str> = validation_rows(&a, &mc)
                .iter()
                .filter(|r| !r.passes())
                .map(|r| r.metric)
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Breach(format!(
                    "relative error of {} is not below 1%",
                    failed.join(", ")
                )))
            }
        }
        Command::Sweep {
            scenario,
            axis,
            from,
            to,
            points,
            log,
            simulate,
        } => {
            let file = load_scenario(scenario, common)?;
            let p = file.params()?;
            let cfg = if *simulate { Some(file.simulation()?) } else { None };
            let range = SweepRange {
                from: *from,
                to: *to,
                points: *points,
                log: *log,
            };
            let rows = run_sweep(&p, *axis, &range, cfg.as_ref())?;
            let mut table = sweep_table(axis.name(), axis.unit(), &rows);
            if let Some(cfg) = cfg {
                table = table
                    .meta("replications", cfg.replications)
                    .meta("seed", cfg.seed)
                    .meta("counting_mode", cfg.counting_mode.to_string());
            }
            emit(&table, common, stdout)
        }
        Command::Optimize {
            scenario,
            profile_points,
            profile_output,
        } => {
            let file = load_scenario(scenario, common)?;
            let p = file.params()?;
            let cfg = file.optimizer()?;
            let opt = find_optimal(&p, &cfg)?;
            emit(&optimum_table(&opt, &cfg), common, stdout)?;
            if let (Some(n), Some(path)) = (profile_points, profile_output) {
                let profile = objective_profile(&p, &cfg, *n)?;
                let f = File::create(path).map_err(|e| io_error(path, e))?;
                profile_table(&profile)
                    .write(io::BufWriter::new(f), common.format.into())
                    .map_err(|e| io_error(path, e))?;
            }
            Ok(())
        }
        Command::Estimate {
            trace,
            scenario_out,
        } => {
            let log = TraceLog::load(trace)?;
            let est = estimate(&log);
            let suggested = est.suggested_scenario();
            let mut table = estimate_table(&est);
            if let Some(s) = &suggested {
                table = table.meta("suggested_scenario", Value::Text(s.to_toml_string()));
            }
            emit(&table, common, stdout)?;
            if let Some(path) = scenario_out {
                let s = suggested.ok_or_else(|| {
                    CliError::Input(
                        "trace has no femto entry or exit; cannot suggest a scenario".into(),
                    )
                })?;
                write_file(path, &s.to_toml_string())?;
            }
            Ok(())
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
