//! `sparsedn` command-line front end.
//!
//! Exit codes: 0 on success, 2 for I/O or file-format failures, 3 for invalid
//! arguments. Every command is deterministic for a fixed flag set.

mod commands;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    cmd_add_noise, cmd_compare, cmd_denoise, cmd_metrics, cmd_spectrum, cmd_sweep, COMPARE_HEADER,
    METRICS_HEADER, REPORT_HEADER, SWEEP_HEADER,
};

use crate::envelope::SliceMatchConfig;
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) | CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_)
            | Error::MalformedFile(_)
            | Error::UnsupportedDepth(_)
            | Error::UnsupportedColorType(_)
            | Error::InvalidDimensions { .. } => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T = ()> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "sparsedn", version, about = "Selective de-noising of sparse-coloured grayscale images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Add seeded white Gaussian noise to an image.
    AddNoise(AddNoiseArgs),
    /// Detect the noise envelope, strip it and redistribute the error.
    Denoise(DenoiseArgs),
    /// Denoise at several thresholds and score each against a clean reference.
    Sweep(SweepArgs),
    /// Compare selective de-noising with mean/median/Gaussian filters.
    Compare(CompareArgs),
    /// Quality metrics between a reference and a candidate image.
    Metrics(MetricsArgs),
    /// Log-magnitude FFT spectrum image.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Clone, Args)]
pub struct EnvelopeArgs {
    /// Minimum Gaussian match score in (0, 1].
    #[arg(long = "match-threshold", default_value_t = 0.85)]
    pub match_threshold: f64,
    /// Pixels above the slicing plane required before fitting.
    #[arg(long = "min-support", default_value_t = 16)]
    pub min_support: usize,
    /// Gaussian pre-smoothing sigma for envelope detection (pixels).
    #[arg(long)]
    pub presmooth: Option<f64>,
    /// Leave regions brighter than this level out of envelope detection.
    #[arg(long = "white-level")]
    pub white_level: Option<u8>,
}

impl EnvelopeArgs {
    pub fn config(&self) -> CliResult<SliceMatchConfig> {
        let cfg = SliceMatchConfig {
            match_threshold: self.match_threshold,
            min_support: self.min_support,
            presmooth_sigma: self.presmooth,
            white_level: self.white_level,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl Default for EnvelopeArgs {
    fn default() -> Self {
        let d = SliceMatchConfig::default();
        Self {
            match_threshold: d.match_threshold,
            min_support: d.min_support,
            presmooth: d.presmooth_sigma,
            white_level: d.white_level,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AddNoiseArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "out")]
    pub output: PathBuf,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mean: f64,
    /// Generated and printed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct DenoiseArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "out")]
    pub output: PathBuf,
    /// Redistribution threshold T in [0, 255].
    #[arg(long, default_value_t = 240, allow_hyphen_values = true)]
    pub threshold: i64,
    #[command(flatten)]
    pub envelope: EnvelopeArgs,
    /// Single-row CSV with the redistribution report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Noisy input.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub clean: PathBuf,
    /// Comma-separated, strictly increasing thresholds.
    #[arg(long = "t-list", allow_hyphen_values = true)]
    pub t_list: String,
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[command(flatten)]
    pub envelope: EnvelopeArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Noisy input.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub clean: PathBuf,
    #[arg(long, default_value_t = 240, allow_hyphen_values = true)]
    pub threshold: i64,
    #[arg(long)]
    pub csv: PathBuf,
    /// Baseline to include: mean, median, gaussian or all.
    #[arg(long, default_value = "all")]
    pub filter: String,
    /// Baseline window side (odd, >= 3).
    #[arg(long, default_value_t = 3)]
    pub ksize: usize,
    /// Sigma of the Gaussian baseline.
    #[arg(long, default_value_t = 1.0)]
    pub fsigma: f64,
    #[command(flatten)]
    pub envelope: EnvelopeArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    /// Reference image.
    #[arg(long)]
    pub clean: PathBuf,
    /// Candidate image.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Enables ROI-PSNR over reference pixels <= T.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<i64>,
    /// Write the row here instead of standard output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "out")]
    pub output: PathBuf,
}

pub fn execute(cli: Cli) -> CliResult {
    match cli.command {
        Command::AddNoise(a) => cmd_add_noise(&a),
        Command::Denoise(a) => cmd_denoise(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Metrics(a) => cmd_metrics(&a),
        Command::Spectrum(a) => cmd_spectrum(&a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("sparsedn: {e}");
            e.exit_code()
        }
    }
}
