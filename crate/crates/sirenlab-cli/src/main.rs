//! `sirenlab`: diagnostics and experiments for sinusoidal networks with
//! edge-of-chaos initialization.
//!
//! Every run writes its data files plus a `manifest.json` that echoes the
//! fully-resolved configuration (including defaulted fields), so any
//! output can be reproduced exactly from its manifest.
//!
//! Exit codes: 0 success, 1 error, 2 when the `verify-init` gate fails.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use config::CommonArgs;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "sirenlab",
    version,
    about = "Sinusoidal networks at the edge of chaos: initialization diagnostics and fitting experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify pre-activation and Jacobian variance statistics against the
    /// closed-form theory (gate: exit code 2 on failure)
    VerifyInit(CommonArgs),
    /// Normalized NTK trace and input-gradient scaling against depth,
    /// with growth-law classification
    NtkScan(CommonArgs),
    /// Output Fourier spectra with the omega0 cutoff-energy metric
    Spectrum(CommonArgs),
    /// Overlap of NTK eigenvectors with discrete Fourier modes
    Overlap(CommonArgs),
    /// Singular value spectra of the end-to-end Jacobian against depth
    SvdScan(CommonArgs),
    /// Train networks on a fitting task (1d, 2d, 3d, image)
    Fit(CommonArgs),
    /// High-frequency denoising experiment on a synthetic image
    Denoise(CommonArgs),
    /// Depth/width sweep over a fitting task, one CSV row per cell
    Sweep(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VerifyInit(_) => "verify-init",
            Command::NtkScan(_) => "ntk-scan",
            Command::Spectrum(_) => "spectrum",
            Command::Overlap(_) => "overlap",
            Command::SvdScan(_) => "svd-scan",
            Command::Fit(_) => "fit",
            Command::Denoise(_) => "denoise",
            Command::Sweep(_) => "sweep",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::VerifyInit(a)
            | Command::NtkScan(a)
            | Command::Spectrum(a)
            | Command::Overlap(a)
            | Command::SvdScan(a)
            | Command::Fit(a)
            | Command::Denoise(a)
            | Command::Sweep(a) => a,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = cli.command.args();
    let resolved = match args.resolve(cli.command.name()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };

    if args.print_config {
        match serde_json::to_string_pretty(&resolved.config) {
            Ok(json) => {
                println!("{json}");
                return ExitCode::SUCCESS;
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
    }

    match commands::run(&resolved) {
        Ok(outcome) => {
            for path in &outcome.outputs {
                println!("wrote {}", path.display());
            }
            match outcome.gate_passed {
                Some(false) => ExitCode::from(2),
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
