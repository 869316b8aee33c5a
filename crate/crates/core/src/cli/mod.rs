//! `ecq` command line: `validate`, `run` and `sweep`.
//!
//! Exit codes: 0 success, 2 invalid input, 3 file system failure. Every
//! diagnostic is one line starting with `error:`.

mod file;
mod grid;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use file::{load_template, LegendSpec, NurseSpec, PwdSpec, ScenarioFile, ScheduleSpec};
pub use grid::{GridError, GridSpec};

use crate::engine::{run_simulation, ScenarioTemplate};
use crate::environment::Role;
use crate::experiment::{aggregate, aggregate_csv, figure_series, rows_csv, run_sweep, DEFAULT_REPLICATIONS};
use crate::metrics::build_report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("{}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn lines(&self) -> Vec<String> {
        match self {
            CliError::Invalid(v) => v.clone(),
            CliError::Io(m) => vec![m.clone()],
        }
    }
}

impl From<crate::engine::ScenarioError> for CliError {
    fn from(e: crate::engine::ScenarioError) -> Self {
        CliError::Invalid(e.lines())
    }
}

#[derive(Debug, Parser)]
#[command(name = "ecq", version, about = "Simulate smart-watch support in a dementia care home")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a scenario and its map.
    Validate {
        scenario: PathBuf,
        /// Use this map instead of the one named in the scenario.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Run one scenario and report its metrics.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        /// Write the event log here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the metric report (JSON) here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a parameter sweep with replications.
    Sweep {
        scenario: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        /// Grid spec, e.g. "p_d=0,0.5;p_detect=0.5;strategy=nowatch,nhelp=0..5".
        #[arg(long)]
        grid: Option<String>,
        /// Start from the reference grid (5 p_d levels x p_detect 0.5,0.2 x nowatch + nhelp 0..5, p_i 0.2); --grid keys override it.
        #[arg(long)]
        paper_grid: bool,
        #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
        reps: usize,
        /// Per-replication rows CSV.
        #[arg(long)]
        out: PathBuf,
        /// Aggregate CSV.
        #[arg(long)]
        aggregate: Option<PathBuf>,
        /// Directory for one series CSV per metric.
        #[arg(long)]
        series: Option<PathBuf>,
        /// Worker threads; defaults to all available.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct SeedArg {
    /// Overrides ECQ_SEED, which overrides the scenario's seed.
    #[arg(long, env = "ECQ_SEED")]
    seed: Option<u64>,
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn validate(scenario: &Path, map: Option<&Path>) -> Result<(), CliError> {
    let template = load_template(scenario, map)?;
    // Validation draws schedules with the scenario's own seed.
    template.build(template.seed)?;
    let m = &template.map;
    println!(
        "OK: {}x{} map, {} labels, {} residents, {} nurses, horizon {}",
        m.width(),
        m.height(),
        m.locations().len(),
        template.pwds.len(),
        template.nurses.len(),
        template.horizon
    );
    for role in [Role::PwdHome, Role::NurseBase, Role::AppointmentSite] {
        for label in m.labels_with_role(role) {
            let cells = m.cells_of(label).map_or(0, <[_]>::len);
            println!("  {label} {} {cells}", role.as_str());
        }
    }
    Ok(())
}

fn run(
    scenario: &Path,
    seed: Option<u64>,
    out: Option<&Path>,
    report: Option<&Path>,
) -> Result<(), CliError> {
    let template = load_template(scenario, None)?;
    let seed = seed.unwrap_or(template.seed);
    let log = run_simulation(&template.build(seed)?)?;
    let r = build_report(&log);
    if let Some(path) = out {
        write(path, &log.serialize())?;
    }
    if let Some(path) = report {
        write(path, &r.to_json())?;
    }
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "seed {} horizon {}", r.seed, r.t_total);
    for p in &r.pwds {
        let _ = writeln!(stdout, "autonomy {} {:.2}", p.id, p.autonomy);
    }
    for p in &r.pwds {
        match p.travel_efficiency {
            Some(te) => writeln!(stdout, "travel_efficiency {} {te:.2}", p.id),
            None => writeln!(stdout, "travel_efficiency {} n/a", p.id),
        }
        .ok();
    }
    for n in &r.nurses {
        let _ = writeln!(stdout, "nurse_efficiency {} {:.2}", n.id, n.efficiency);
    }
    let _ = writeln!(stdout, "episodes {} calls {}", r.episodes(), r.calls());
    Ok(())
}

struct SweepArgs<'a> {
    seed: Option<u64>,
    grid: Option<&'a str>,
    paper_grid: bool,
    reps: usize,
    out: &'a Path,
    aggregate: Option<&'a Path>,
    series: Option<&'a Path>,
    jobs: Option<usize>,
}

fn sweep_config(template: ScenarioTemplate, a: &SweepArgs) -> Result<crate::experiment::SweepConfig, CliError> {
    let base = if a.paper_grid { GridSpec::reference() } else { GridSpec::default() };
    let spec = match a.grid {
        Some(text) => base.overlay(GridSpec::parse(text).map_err(|e| CliError::Invalid(vec![e.to_string()]))?),
        None => base,
    };
    let seed = a.seed.unwrap_or(template.seed);
    spec.sweep(template, a.reps, seed).map_err(|e| CliError::Invalid(vec![e]))
}

fn sweep(scenario: &Path, a: SweepArgs) -> Result<(), CliError> {
    let template = load_template(scenario, None)?;
    template.build(template.seed)?;
    let config = sweep_config(template, &a)?;
    let started = Instant::now();
    eprintln!(
        "sweep: {} configurations x {} replications = {} runs",
        config.levels().len(),
        config.replications,
        config.scenario_count()
    );
    let rows = run_sweep(&config, a.jobs).map_err(|e| CliError::Invalid(vec![e.to_string()]))?;
    write(a.out, &rows_csv(&rows))?;
    let aggregates = aggregate(&rows);
    if let Some(path) = a.aggregate {
        write(path, &aggregate_csv(&aggregates))?;
    }
    if let Some(dir) = a.series {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        for (name, text) in figure_series(&aggregates) {
            write(&dir.join(name), &text)?;
        }
    }
    eprintln!(
        "sweep: {} rows from {} runs in {:.2}s",
        rows.len(),
        config.scenario_count(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

/// Parses `args` (program name first) and runs the command; returns the exit
/// code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return EXIT_OK;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("bad arguments");
            eprintln!("error: {}", first.trim_start_matches("error: "));
            return EXIT_INVALID;
        }
    };
    let result = match cli.command {
        Command::Validate { scenario, map } => validate(&scenario, map.as_deref()),
        Command::Run { scenario, seed, out, report } => {
            run(&scenario, seed.seed, out.as_deref(), report.as_deref())
        }
        Command::Sweep { scenario, seed, grid, paper_grid, reps, out, aggregate, series, jobs } => sweep(
            &scenario,
            SweepArgs {
                seed: seed.seed,
                grid: grid.as_deref(),
                paper_grid,
                reps,
                out: &out,
                aggregate: aggregate.as_deref(),
                series: series.as_deref(),
                jobs,
            },
        ),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            for line in e.lines() {
                eprintln!("error: {line}");
            }
            e.exit_code()
        }
    }
}
