//! Command implementations behind the `pathlab` binary.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pathlab_core::experiment::{
    run_experiment_with, ConfigError, ExperimentConfig, Schedule, DEFAULT_MASTER_SEED, DESK_SCALE_LIMIT,
    REFERENCE_SIZES, REFERENCE_TRIALS,
};
use pathlab_core::model::{ModelError, MAX_PATH_LENGTH};
use pathlab_core::report::{self, ReportError, ReportView};
use pathlab_core::stats::DEFAULT_MIN_EXPECTED;
use pathlab_core::{ExperimentReport, GeneratorMode, OutputFormat};
use thiserror::Error;

/// Tolerances used by `validate` when printing its verdict lines.
pub const AVERAGE_TOLERANCE: f64 = 0.05;
pub const BIN_TOLERANCE: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "pathlab", version, about = "Patricia trie path-length model and Monte-Carlo harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the analytic path-length model for one trie size.
    Model {
        /// Number of addresses in the trie.
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = MAX_PATH_LENGTH)]
        kmax: u32,
        #[arg(long, default_value = "md")]
        format: OutputFormat,
    },
    /// Build random tries and report their path-length distributions.
    Simulate(RunArgs),
    /// Simulate, compare against the model and run the chi-square tests.
    Validate(RunArgs),
    /// Regenerate the six reference tables into a directory.
    Tables {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "PATHLAB_SEED")]
        seed: Option<u64>,
        #[arg(long, default_value = "uniform")]
        mode: GeneratorMode,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Comma-separated trie sizes.
    #[arg(long, value_delimiter = ',', default_values_t = REFERENCE_SIZES)]
    pub sizes: Vec<u64>,
    #[arg(long, default_value_t = REFERENCE_TRIALS)]
    pub trials: u32,
    /// Master seed; falls back to PATHLAB_SEED, then a built-in default.
    #[arg(long, env = "PATHLAB_SEED")]
    pub seed: Option<u64>,
    #[arg(long, default_value = "uniform")]
    pub mode: GeneratorMode,
    #[arg(long, default_value = "md")]
    pub format: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = MAX_PATH_LENGTH)]
    pub kmax: u32,
    /// Minimum expected count per chi-square bin.
    #[arg(long, default_value_t = DEFAULT_MIN_EXPECTED)]
    pub min_expected: f64,
    /// Permit sizes above 100,000 (up to 1,000,000).
    #[arg(long)]
    pub allow_large: bool,
    /// Run trials one after another instead of in parallel.
    #[arg(long)]
    pub sequential: bool,
}

impl RunArgs {
    pub fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            sizes: self.sizes.clone(),
            trials: self.trials,
            master_seed: self.seed.unwrap_or(DEFAULT_MASTER_SEED),
            mode: self.mode,
            k_max: self.kmax,
            min_expected: self.min_expected,
            allow_large: self.allow_large,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Report(ReportError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Config(c) => CliError::Config(c),
            ReportError::Model(m) => CliError::Model(m),
            other => CliError::Report(other),
        }
    }
}

impl CliError {
    /// 1 for bad input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Model(_) => 1,
            CliError::Report(_) | CliError::Io { .. } => 2,
        }
    }
}

fn emit(text: &str, out: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => {
            stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn warn_large(cfg: &ExperimentConfig, stderr: &mut dyn Write) {
    for &n in cfg.sizes.iter().filter(|&&n| n > DESK_SCALE_LIMIT) {
        let _ = writeln!(stderr, "warning: simulating {n} addresses per trial; this is slow and memory hungry");
    }
}

fn verdict(report: &ExperimentReport) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("## Checks\n\n");
    for s in &report.sizes {
        let avg_ok = (s.avg_divergence_depth - s.model_expected_path_length).abs() <= AVERAGE_TOLERANCE;
        let bins_ok = s.max_abs_difference <= BIN_TOLERANCE;
        let p = s.chi_square_counts.result().map(|r| r.p_value);
        let _ = writeln!(
            out,
            "- n = {}: average {} (|{:.4} - {:.4}| <= {AVERAGE_TOLERANCE}), bins {} (max diff {:.6} <= {BIN_TOLERANCE}), count-based p-value {}",
            s.size,
            if avg_ok { "ok" } else { "off" },
            s.avg_divergence_depth,
            s.model_expected_path_length,
            if bins_ok { "ok" } else { "off" },
            s.max_abs_difference,
            p.map_or("N/A".to_string(), |p| format!("{p:.6}")),
        );
    }
    out
}

fn simulate(args: &RunArgs, view: ReportView, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let cfg = args.config();
    cfg.validate()?;
    warn_large(&cfg, stderr);
    let schedule = if args.sequential { Schedule::Sequential } else { Schedule::Parallel };
    let report = run_experiment_with(&cfg, schedule)?;
    let mut text = report::render_report(&report, args.format, view);
    if view == ReportView::Validation && args.format == OutputFormat::Markdown {
        text.push_str(&verdict(&report));
    }
    emit(&text, args.out.as_ref(), stdout)
}

/// Runs one parsed command, writing its output to `stdout` unless the command
/// was given an output path.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Model { n, kmax, format } => {
            let text = report::model_query(*n, *kmax, *format)?;
            emit(&text, None, stdout)
        }
        Command::Simulate(args) => simulate(args, ReportView::Summary, stdout, stderr),
        Command::Validate(args) => simulate(args, ReportView::Validation, stdout, stderr),
        Command::Tables { out, seed, mode } => {
            let cfg = ExperimentConfig {
                master_seed: seed.unwrap_or(DEFAULT_MASTER_SEED),
                mode: *mode,
                ..ExperimentConfig::default()
            };
            let files = report::reproduce_tables(&cfg)?;
            let written = report::write_tables(out, &files)?;
            for path in written {
                let _ = writeln!(stdout, "{}", path.display());
            }
            Ok(())
        }
    }
}
