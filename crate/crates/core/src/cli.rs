//! `sclera-sim` command line.
//!
//! Exit codes: 0 success, 1 configuration error, 2 simulation or oracle
//! failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::export::{render_force_svg, write_events_json, write_samples_csv};
use crate::metrics::{compute_metrics, AggregateReport, TrialMetrics};
use crate::operator::{SafetyMode, Skill};
use crate::oracle::{convergence_sweep, render_report, SweepConfig};
use crate::scenario::{Overrides, ScenarioFile};
use crate::sim::{run_batch, Execution, ScenarioConfig, TrialLog};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sclera-sim", version, about = "Active vs passive sclera-force safety simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run seeded trial batches and write logs, metrics and plots.
    Run(RunArgs),
    /// Sweep the single-axis adaptive loop over random plants.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Active,
    Passive,
    Both,
}

impl ModeArg {
    fn modes(self) -> Vec<SafetyMode> {
        match self {
            ModeArg::Active => vec![SafetyMode::Active],
            ModeArg::Passive => vec![SafetyMode::Passive],
            ModeArg::Both => vec![SafetyMode::Active, SafetyMode::Passive],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Expert,
    Intermediate,
    Novice,
}

impl From<ProfileArg> for Skill {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Expert => Skill::Expert,
            ProfileArg::Intermediate => Skill::Intermediate,
            ProfileArg::Novice => Skill::Novice,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// TOML scenario; defaults are used when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Base seed; trial i uses seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Integration step in seconds (scenario value or 0.001 when omitted).
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub no_plots: bool,
    #[arg(long, value_enum)]
    pub profile: Option<ProfileArg>,
    /// Run trials one after another instead of in parallel.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, clap::Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 50)]
    pub cases: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    #[arg(long, default_value_t = 5e-6)]
    pub lambda_rate: f64,
    #[arg(long, default_value_t = 0.01)]
    pub initial_compliance: f64,
    #[arg(long, default_value_t = 10.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0.001)]
    pub dt: f64,
    /// Pass threshold on the final |dF|, mN.
    #[arg(long, default_value_t = 1.0)]
    pub tolerance: f64,
}

#[derive(Debug, Serialize)]
pub struct TrialEntry {
    pub mode: SafetyMode,
    pub index: usize,
    pub seed: u64,
    pub files: Vec<String>,
}

/// Reproducibility record written before any trial runs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub timestamp: String,
    pub status: &'static str,
    pub scenario: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub configs: Vec<ScenarioConfig>,
    pub trials: Vec<TrialEntry>,
    /// Every file this run writes to the output directory.
    pub files: Vec<String>,
}

impl RunManifest {
    fn write(&self, dir: &Path) -> Result<()> {
        let f = BufWriter::new(File::create(dir.join("manifest.json"))?);
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }
}

pub fn trial_stem(mode: SafetyMode, index: usize) -> String {
    format!("trial_{}_{}", mode.as_str(), index)
}

/// Parse arguments and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Oracle(args) => cmd_oracle(&args),
    }
}

fn report(err: &Error) -> i32 {
    eprintln!("error: {err}");
    if err.is_simulation_failure() {
        EXIT_FAILURE
    } else {
        EXIT_CONFIG
    }
}

pub fn cmd_run(args: &RunArgs) -> i32 {
    let configs = match resolve_configs(args) {
        Ok(c) => c,
        Err(e) => return report(&e),
    };
    if args.trials == 0 {
        eprintln!("error: --trials must be at least 1");
        return EXIT_CONFIG;
    }
    match execute_run(args, configs) {
        Ok(table) => {
            print!("{table}");
            EXIT_OK
        }
        Err(e) => report(&e),
    }
}

fn resolve_configs(args: &RunArgs) -> Result<Vec<ScenarioConfig>> {
    let file = match &args.scenario {
        Some(path) => ScenarioFile::load(path)?,
        None => ScenarioFile::default(),
    };
    args.mode
        .modes()
        .into_iter()
        .map(|mode| {
            file.resolve(Overrides {
                mode: Some(mode),
                skill: args.profile.map(Skill::from),
                seed: args.seed,
                dt: args.dt,
            })
        })
        .collect()
}

fn execute_run(args: &RunArgs, configs: Vec<ScenarioConfig>) -> Result<String> {
    let dir = &args.out;
    std::fs::create_dir_all(dir)?;

    let mut trials = Vec::new();
    let mut files = vec!["manifest.json".to_owned(), "metrics.json".to_owned(), "aggregate.json".to_owned()];
    for cfg in &configs {
        for i in 0..args.trials {
            let stem = trial_stem(cfg.mode, i);
            let mut own = vec![format!("{stem}.csv"), format!("{stem}.events.json")];
            if !args.no_plots {
                own.push(format!("{stem}.svg"));
            }
            files.extend(own.iter().cloned());
            trials.push(TrialEntry {
                mode: cfg.mode,
                index: i,
                seed: cfg.seed.wrapping_add(i as u64),
                files: own,
            });
        }
    }
    let mut manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        timestamp: chrono::Utc::now().to_rfc3339(),
        status: "running",
        scenario: args.scenario.clone(),
        output_dir: dir.clone(),
        configs: configs.clone(),
        trials,
        files,
    };
    manifest.write(dir)?;

    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let mut report = AggregateReport::default();
    let mut per_trial: Vec<(SafetyMode, usize, u64, TrialMetrics)> = Vec::new();
    for cfg in &configs {
        let logs = match run_batch(cfg, args.trials, exec) {
            Ok(logs) => logs,
            Err(e) => {
                manifest.status = "failed";
                manifest.write(dir)?;
                return Err(e);
            }
        };
        let mut metrics = Vec::with_capacity(logs.len());
        for (i, log) in logs.iter().enumerate() {
            write_trial(dir, log, i, cfg, !args.no_plots)?;
            let m = compute_metrics(log, &cfg.controller)?;
            per_trial.push((cfg.mode, i, log.seed, m));
            metrics.push(m);
        }
        report.push(cfg.mode, cfg.profile.skill, metrics)?;
    }

    #[derive(Serialize)]
    struct MetricsRow {
        mode: SafetyMode,
        index: usize,
        seed: u64,
        #[serde(flatten)]
        metrics: TrialMetrics,
        unsafe_fraction: f64,
    }
    let rows: Vec<_> = per_trial
        .into_iter()
        .map(|(mode, index, seed, metrics)| MetricsRow {
            mode,
            index,
            seed,
            metrics,
            unsafe_fraction: metrics.unsafe_fraction(),
        })
        .collect();
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join("metrics.json"))?), &rows)?;
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join("aggregate.json"))?), &report)?;

    manifest.status = "complete";
    manifest.write(dir)?;
    Ok(report.table())
}

fn write_trial(dir: &Path, log: &TrialLog, index: usize, cfg: &ScenarioConfig, plots: bool) -> Result<()> {
    let stem = trial_stem(log.mode, index);
    write_samples_csv(&log.samples, BufWriter::new(File::create(dir.join(format!("{stem}.csv")))?))?;
    write_events_json(log, BufWriter::new(File::create(dir.join(format!("{stem}.events.json")))?))?;
    if plots {
        std::fs::write(dir.join(format!("{stem}.svg")), render_force_svg(log, cfg.controller.l3))?;
    }
    Ok(())
}

pub fn cmd_oracle(args: &OracleArgs) -> i32 {
    let cfg = SweepConfig {
        cases: args.cases,
        seed: args.seed,
        gains: crate::control::OneDofGains {
            alpha: args.alpha,
            lambda_rate: args.lambda_rate,
            initial_compliance: args.initial_compliance,
        },
        duration: args.duration,
        dt: args.dt,
        tolerance: args.tolerance,
        ..SweepConfig::default()
    };
    if !(args.alpha.is_finite() && args.alpha >= 0.0) {
        eprintln!("error: --alpha must be finite and >= 0");
        return EXIT_CONFIG;
    }
    match convergence_sweep(&cfg) {
        Ok(cases) => {
            print!("{}", render_report(&cfg, &cases));
            if cases.iter().all(|c| c.passed) {
                EXIT_OK
            } else {
                EXIT_FAILURE
            }
        }
        Err(e) => report(&e),
    }
}
