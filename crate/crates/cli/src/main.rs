//! `resb` — sensitivity bounds for optical resonance sensors.

mod commands;
mod config;
mod output;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::RunConfig;
use output::Writer;

#[derive(Parser)]
#[command(
    name = "resb",
    version,
    about = "Quantum-limited sensitivity bounds for optical resonance sensors",
    long_about = "Computes quantum Cramér-Rao bounds for transmission- and phase-based \
                  resonance sensing with coherent and bright two-mode squeezed probes, \
                  and exports sensitivity curves, figure-of-merit maps, loss sweeps, \
                  minimum-phase cross-validations, and first-principles verification \
                  reports as CSV/JSON."
)]
struct Cli {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(short, long, global = true)]
    config: Option<String>,

    /// Override one config key, e.g. --set probe.s=1.5 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    /// Overwrite existing output files.
    #[arg(long, global = true)]
    force: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate all four quantum Cramér-Rao bounds over a sensor-transmission grid.
    Bounds,
    /// Sensitivity per photon vs generalized wavelength for both estimands.
    SensitivityCurve,
    /// Maximum sensitivity per photon vs squeezing parameter.
    MaxVsS,
    /// Figure-of-merit (phase/transmission) map over (t_res, t_off).
    FomMap,
    /// Quantum enhancement factor vs external loss.
    EqefSweep,
    /// Cross-validate FFT and kernel-integral minimum-phase reconstructions.
    KkPhase,
    /// Run the state-engine and homodyne verification grids.
    Verify,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = RunConfig::load(cli.config.as_deref(), &cli.sets)?;
    let name = match cli.command {
        Command::Bounds => "bounds",
        Command::SensitivityCurve => "sensitivity-curve",
        Command::MaxVsS => "max-vs-s",
        Command::FomMap => "fom-map",
        Command::EqefSweep => "eqef-sweep",
        Command::KkPhase => "kk-phase",
        Command::Verify => "verify",
    };
    let mut writer = Writer::new(&cfg, name, cli.force)?;
    match cli.command {
        Command::Bounds => commands::cmd_bounds(&cfg, &mut writer)?,
        Command::SensitivityCurve => commands::cmd_sensitivity_curve(&cfg, &mut writer)?,
        Command::MaxVsS => commands::cmd_max_vs_s(&cfg, &mut writer)?,
        Command::FomMap => commands::cmd_fom_map(&cfg, &mut writer)?,
        Command::EqefSweep => commands::cmd_eqef_sweep(&cfg, &mut writer)?,
        Command::KkPhase => commands::cmd_kk_phase(&cfg, &mut writer)?,
        Command::Verify => commands::cmd_verify(&cfg, &mut writer)?,
    }
    for path in &writer.written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
