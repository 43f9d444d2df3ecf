//! `mlwt`: causal Mittag-Leffler wavelet analysis from the command line.
//!
//! Subcommands wire ingestion, gap filling, the wavelet transform, scale
//! slicing, threshold warnings, and raster export together. Exit codes:
//! 0 success, 1 usage, 2 data, 3 numeric.

mod commands;
mod config;
mod raster;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigFile;

#[derive(Parser)]
#[command(name = "mlwt", version, about = "Causal generalized Morlet wavelet analysis for daily time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summary statistics of a daily CSV series (after gap filling)
    Stats(StatsArgs),
    /// Run the wavelet transform and write scalogram grids
    Transform(TransformArgs),
    /// Extract one scale's time row from a stored scalogram
    Slice(SliceArgs),
    /// Detect threshold-crossing warnings on a power scale slice
    Alerts(AlertsArgs),
    /// Render a grid CSV as a grayscale heatmap raster
    Render(RenderArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Flat-key TOML file supplying defaults for any long flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct CsvArgs {
    /// Name of the date column
    #[arg(long)]
    date_column: Option<String>,
    /// Name of the value column
    #[arg(long)]
    value_column: Option<String>,
    /// Field delimiter (single character)
    #[arg(long)]
    delimiter: Option<char>,
    /// chrono date format of the date column
    #[arg(long)]
    date_format: Option<String>,
    /// Sentinel value treated as missing (repeatable)
    #[arg(long = "sentinel")]
    sentinels: Vec<f64>,
    /// Keep negative values instead of masking them as missing
    #[arg(long)]
    keep_negative: bool,
    /// Longest gap run that may be interpolated
    #[arg(long)]
    max_gap_run: Option<usize>,
    /// Largest admissible fraction of missing samples
    #[arg(long)]
    max_gap_fraction: Option<f64>,
}

#[derive(Args, Clone)]
struct WaveletArgs {
    /// Modulation exponent
    #[arg(long)]
    alpha: Option<f64>,
    /// Use the causal (past-only) kernel
    #[arg(long, conflicts_with = "no_causal")]
    causal: bool,
    /// Use the two-sided kernel
    #[arg(long)]
    no_causal: bool,
    /// Modulation evaluation: auto, series, or stretched
    #[arg(long)]
    mlf_mode: Option<String>,
    /// Modulation cutoff defining the kernel truncation radius
    #[arg(long)]
    support_eps: Option<f64>,
    /// Subtract the series mean before transforming
    #[arg(long, conflicts_with = "no_detrend")]
    detrend: bool,
    /// Keep the raw series offset
    #[arg(long)]
    no_detrend: bool,
    /// Smallest scale in days
    #[arg(long)]
    scales_min: Option<f64>,
    /// Largest scale in days
    #[arg(long)]
    scales_max: Option<f64>,
    /// Number of log-spaced scales
    #[arg(long)]
    scales_count: Option<usize>,
}

#[derive(Args)]
struct StatsArgs {
    /// Input daily CSV
    #[arg(long)]
    input: PathBuf,
    /// Output format: json or text
    #[arg(long)]
    format: Option<String>,
    #[command(flatten)]
    csv: CsvArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct TransformArgs {
    /// Input daily CSV
    #[arg(long)]
    input: PathBuf,
    /// Output prefix; writes PREFIX.cwsg, PREFIX.power.csv, PREFIX.phase.csv
    #[arg(long)]
    output: PathBuf,
    /// Power normalization: global-max, per-scale-max, or none
    #[arg(long)]
    normalize: Option<String>,
    #[command(flatten)]
    csv: CsvArgs,
    #[command(flatten)]
    wavelet: WaveletArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SliceArgs {
    /// Input binary scalogram (.cwsg)
    #[arg(long)]
    input: PathBuf,
    /// Scale in days; the nearest grid scale is used
    #[arg(long)]
    slice_scale: Option<f64>,
    /// Which grid to slice: power or phase
    #[arg(long)]
    grid: Option<String>,
    /// Power normalization: global-max, per-scale-max, or none
    #[arg(long)]
    normalize: Option<String>,
    /// Output CSV path (stdout when absent)
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct AlertsArgs {
    /// Input binary scalogram (.cwsg)
    #[arg(long)]
    input: PathBuf,
    /// Scale in days; the nearest grid scale is used
    #[arg(long)]
    slice_scale: Option<f64>,
    /// Warning threshold on globally normalized power
    #[arg(long)]
    threshold: Option<f64>,
    /// Debounce window in days
    #[arg(long)]
    min_separation: Option<usize>,
    /// Minimum kernel support fraction at a crossing
    #[arg(long)]
    min_support: Option<f64>,
    /// Official event dates (one ISO date per line, # comments)
    #[arg(long)]
    events_file: Option<PathBuf>,
    /// Matching window in days for --events-file
    #[arg(long)]
    window_days: Option<u32>,
    /// Output JSON path (stdout when absent)
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct RenderArgs {
    /// Input grid CSV (as written by transform)
    #[arg(long)]
    input: PathBuf,
    /// Output raster path (binary PGM; .png with the png feature)
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

/// Error with a documented process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<mlwt::SeriesError> for CliError {
    fn from(e: mlwt::SeriesError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<mlwt::grid_io::GridIoError> for CliError {
    fn from(e: mlwt::grid_io::GridIoError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<mlwt::AlertError> for CliError {
    fn from(e: mlwt::AlertError) -> Self {
        match e {
            mlwt::AlertError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<mlwt::TransformError> for CliError {
    fn from(e: mlwt::TransformError) -> Self {
        use mlwt::TransformError::*;
        match e {
            Kernel(_) | WindowTooLarge { .. } => CliError::Numeric(e.to_string()),
            ScaleOutOfRange { .. } | GappySeries => CliError::Data(e.to_string()),
            EmptyGrid | InvalidGrid(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<mlwt::KernelError> for CliError {
    fn from(e: mlwt::KernelError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    std::process::exit(0);
                }
                _ => {
                    eprint!("{e}");
                    std::process::exit(1);
                }
            }
        }
    };
    let result = match cli.command {
        Command::Stats(args) => with_config(&args.common, |cfg| commands::run_stats(&args, cfg)),
        Command::Transform(args) => {
            with_config(&args.common, |cfg| commands::run_transform(&args, cfg))
        }
        Command::Slice(args) => with_config(&args.common, |cfg| commands::run_slice(&args, cfg)),
        Command::Alerts(args) => with_config(&args.common, |cfg| commands::run_alerts(&args, cfg)),
        Command::Render(args) => with_config(&args.common, |cfg| commands::run_render(&args, cfg)),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}

fn with_config<F>(common: &CommonArgs, f: F) -> Result<(), CliError>
where
    F: FnOnce(&ConfigFile) -> Result<(), CliError>,
{
    let cfg = match &common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    f(&cfg)
}
