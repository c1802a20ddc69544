//! Batch driver for `hhbar-core`: resolves a run configuration, runs one
//! command and writes CSV or JSON.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O
//! error.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hhbar_core::potential::Flavor;

pub use commands::execute;
pub use config::{Format, RunConfig, Settings};
pub use error::CliError;
pub use output::Artifact;

#[derive(Debug, Parser)]
#[command(name = "hhbar", version, about = "Vibrational levels, scattering length and WKB checks for H–H̄")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Settings shared by every command. Flags override the config file.
#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// `key = value` config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// `bo` or `scaled`.
    #[arg(long, global = true)]
    pub flavor: Option<Flavor>,
    #[arg(long = "l", global = true)]
    pub l: Option<u32>,
    /// Exponent pairs; the basis has twice as many functions.
    #[arg(long = "nmax", global = true)]
    pub n_max: Option<usize>,
    #[arg(long = "rmin", global = true)]
    pub r_min: Option<f64>,
    #[arg(long = "rmax", global = true)]
    pub r_max: Option<f64>,
    /// Relative cutoff on overlap eigenvalues.
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long = "window-lo", global = true)]
    pub window_lo: Option<f64>,
    #[arg(long = "window-hi", global = true)]
    pub window_hi: Option<f64>,
    /// Tail length d (bohr); calibrated when absent.
    #[arg(long = "d", global = true)]
    pub d: Option<f64>,
    /// Tail constant D; calibrated when absent.
    #[arg(long = "D", global = true)]
    pub big_d: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// `csv` or `json`.
    #[arg(long, global = true)]
    pub format: Option<Format>,
}

impl CommonArgs {
    fn settings(&self) -> Settings {
        Settings {
            flavor: self.flavor,
            l: self.l,
            n_max: self.n_max,
            r_min: self.r_min,
            r_max: self.r_max,
            tau: self.tau,
            window_lo: self.window_lo,
            window_hi: self.window_hi,
            d: self.d,
            big_d: self.big_d,
            output: self.output.clone(),
            format: self.format,
        }
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        RunConfig::resolve(file.overlay(self.settings()))
    }
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Both potential curves and δE_lep on a grid: `R,V_BO,V_scaled,delta_lep_mh`.
    Potential {
        /// Explicit radii, comma separated.
        #[arg(long, value_delimiter = ',')]
        r: Vec<f64>,
        /// Uniform grid `lo:hi[:n]` (default 0.1:20:200).
        #[arg(long)]
        rgrid: Option<String>,
    },
    /// Levels of one flavor and l.
    Spectrum,
    /// s-wave levels of both flavors beside the published values.
    Table2,
    /// p-wave levels of both flavors beside the published values.
    Table3,
    /// Threshold quantum numbers beside the published values.
    Table4,
    /// Leptonic shift beside the published values.
    Table5 {
        /// `lo:hi` keeps tabulated radii in range; `lo:hi:n` uses a uniform grid.
        #[arg(long)]
        rgrid: Option<String>,
    },
    /// Tangent-line scattering length with a basis scan for its uncertainty.
    Scatter {
        /// n_max values of the scan (default n_max − 20, n_max).
        #[arg(long = "scan-nmax", value_delimiter = ',')]
        scan_nmax: Vec<usize>,
        /// r_max values of the scan (default r_max − 2, r_max, r_max + 2).
        #[arg(long = "scan-rmax", value_delimiter = ',')]
        scan_rmax: Vec<f64>,
    },
    /// Threshold quantum numbers and WKB scattering length for one flavor.
    Wkb {
        /// Rows used to calibrate d and D when they are not given.
        #[arg(long = "calibration-rows", value_delimiter = ',')]
        calibration_rows: Vec<u32>,
    },
    /// Energies of selected states over a grid of n_max and r_max.
    Scan {
        #[arg(long = "nmax-list", value_delimiter = ',')]
        nmax_list: Vec<usize>,
        #[arg(long = "rmax-list", value_delimiter = ',')]
        rmax_list: Vec<f64>,
        /// 1-based state indices (default 1,20,29).
        #[arg(long, value_delimiter = ',')]
        states: Vec<usize>,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run_parsed(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("hhbar: {e}");
            e.exit_code()
        }
    }
}

pub fn run_parsed(cli: &Cli) -> Result<(), CliError> {
    let config = cli.common.resolve()?;
    let artifact = execute(&cli.command, &config)?;
    output::emit(&artifact, &config)
}
