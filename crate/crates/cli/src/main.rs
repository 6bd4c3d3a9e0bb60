//! `qmacro`: sizes of quantum superpositions from configs, Wigner grids,
//! fringe scans and the built-in catalog.
//!
//! Exit codes: 0 ok, 2 parse error, 3 physics-domain error, 4 unfaithful
//! reconstruction.

mod commands;
mod error;
mod output;
mod units;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CatalogSelector, WignerArgs};
use error::CliError;
use output::Format;
use units::Quantity;

#[derive(Debug, Parser)]
#[command(name = "qmacro", version, about = "Extensive and entangled sizes of quantum superpositions")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,
    /// Seed for stochastic calibrations.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sizes of a state described by a JSON config.
    Measure { config: PathBuf },
    /// Reconstruct a Wigner grid file and maximize the quadrature QFI.
    Wigner {
        grid: PathBuf,
        /// Fock dimension (default: raised until the reconstruction is faithful).
        #[arg(long)]
        dim: Option<usize>,
        /// Also list the reconstructed populations.
        #[arg(long)]
        report: bool,
        /// Mode mass, e.g. "1e-20 kg".
        #[arg(long)]
        mass: Option<String>,
        /// Mode frequency, e.g. "1e6 Hz" or "6.3e6 rad/s".
        #[arg(long)]
        frequency: Option<String>,
        #[arg(long)]
        mode_particles: Option<f64>,
        #[arg(long)]
        material: Option<String>,
        /// Single-atom spread, e.g. "3e-12 m".
        #[arg(long)]
        delta_u: Option<String>,
    },
    /// Fringe-visibility bounds for a near-field interferometer.
    Diffraction {
        /// JSON setup; required unless --preset is given.
        #[arg(required_unless_present = "preset")]
        config: Option<PathBuf>,
        #[arg(long, value_parser = ["fein"], conflicts_with = "config")]
        preset: Option<String>,
        /// Fringe scan file; its fit replaces the configured visibility.
        #[arg(long)]
        scan: Option<PathBuf>,
        /// Number of noisy refits used to calibrate the visibility estimate.
        #[arg(long, default_value_t = 0)]
        calibrate: usize,
    },
    /// Mode volumes, thermal sizes and the discrete-chain check.
    Oscillator { config: PathBuf },
    /// Built-in datasets.
    Catalog {
        #[arg(long, value_enum)]
        what: CatalogSelector,
    },
}

fn run(cli: &Cli) -> Result<(String, Vec<String>), CliError> {
    let report = match &cli.command {
        Command::Measure { config } => commands::measure(&commands::load_config(config)?)?,
        Command::Wigner { grid, dim, report, mass, frequency, mode_particles, material, delta_u } => {
            let args = WignerArgs {
                dim: *dim,
                report: *report,
                mass: mass.clone().map(Quantity),
                frequency: frequency.clone().map(Quantity),
                mode_particles: *mode_particles,
                material: material.clone(),
                delta_u: delta_u.clone().map(Quantity),
            };
            commands::wigner(grid, &args)?
        }
        Command::Diffraction { config, preset: _, scan, calibrate } => {
            let input = match config {
                Some(path) => commands::load_config::<commands::DiffractionConfig>(path)?.resolve()?,
                None => commands::fein_input(),
            };
            let scan = scan.as_ref().map(qmacro::diffraction::load_scan).transpose()?;
            commands::diffraction(&input, scan.as_ref(), *calibrate, cli.seed)?
        }
        Command::Oscillator { config } => commands::oscillator(&commands::load_config(config)?)?,
        Command::Catalog { what } => {
            if *what == CatalogSelector::Fig3 && cli.format == Format::Csv {
                return Ok((commands::fig3_csv()?, Vec::new()));
            }
            commands::catalog(*what)?
        }
    };
    let notes = if cli.format == Format::Csv { report.notes.clone() } else { Vec::new() };
    Ok((report.render(cli.format), notes))
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display()))),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| CliError::Output(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|(text, notes)| {
        for n in notes {
            eprintln!("note: {n}");
        }
        emit(&cli, &text)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
