//! `amhd`: run, verify and inspect Galerkin MHD traces.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 numerical blow-up,
//! 3 bound failure.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    BlowUp(String),
    BoundFailure(String),
    Other(String),
}

impl CliError {
    pub fn other(e: impl fmt::Display) -> Self {
        CliError::Other(e.to_string())
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Other(_) => 1,
            CliError::BlowUp(_) => 2,
            CliError::BoundFailure(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::BlowUp(m) => write!(f, "blow-up: {m}"),
            CliError::BoundFailure(m) => write!(f, "bound failure: {m}"),
            CliError::Other(m) => write!(f, "error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "amhd", version, about = "Galerkin MHD runs with a priori bound verification")]
struct Cli {
    /// 0 quiet, 1 one line per sample, 2 adds details.
    #[arg(long, global = true, default_value_t = 1)]
    verbosity: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate from a JSON run config and write a trace archive.
    Run {
        config: PathBuf,
        /// Archive directory (overrides `output`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check bounds along a trace archive.
    Verify {
        trace: PathBuf,
        /// Comma-separated ids, `ID` or `ID:s`.
        #[arg(long, value_delimiter = ',')]
        bounds: Vec<String>,
        /// Indices for ids given without one.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        s: Vec<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        /// Verify on `[t0, t_end]` only.
        #[arg(long)]
        t_end: Option<f64>,
        /// Report directory (default `<trace>/verify`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a constants table.
    Constants {
        /// Embedding constants `C_s`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        s: Vec<f64>,
        /// Sup constants `c_p`.
        #[arg(long, value_delimiter = ',')]
        sup: Vec<f64>,
        /// Lattice constants `C_{p,a}` as `p:a`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lattice: Vec<String>,
        #[arg(long, default_value_t = 16)]
        resolution: usize,
        #[arg(long, default_value_t = 48)]
        trials: usize,
        #[arg(long, default_value_t = 20_240_611)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        cutoff: u32,
        #[arg(long, default_value_t = 2.0)]
        safety: f64,
        /// Also write the table here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the spectral decay rate of a checkpoint.
    Spectrum {
        checkpoint: PathBuf,
        /// Shell range `lo,hi`.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        shells: Option<Vec<u32>>,
        /// Report `delta Phi` alongside the fit.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one config at several truncations and report psi(t).
    Compare {
        config: PathBuf,
        /// Truncations, e.g. `8,16,32`.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors share exit code 1 with config errors
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let v = cli.verbosity;
    let res = match cli.cmd {
        Cmd::Run { config, out } => commands::run(&config, out, v),
        Cmd::Verify {
            trace,
            bounds,
            s,
            delta,
            sigma,
            t_end,
            out,
        } => commands::verify(&trace, &bounds, &s, delta, sigma, t_end, out, v),
        Cmd::Constants {
            s,
            sup,
            lattice,
            resolution,
            trials,
            seed,
            cutoff,
            safety,
            out,
        } => commands::constants(
            &s,
            &sup,
            &lattice,
            amhd_core::constants::EstimatorSettings {
                resolution,
                trials,
                seed,
                cutoff,
            },
            safety,
            out,
        ),
        Cmd::Spectrum {
            checkpoint,
            shells,
            delta,
            out,
        } => commands::spectrum(&checkpoint, shells.map(|s| (s[0], s[1])), delta, out),
        Cmd::Compare { config, n, out } => commands::compare(&config, &n, out, v),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
