use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dce_cli::artifacts::{read_manifest, run_and_write};
use dce_cli::config::*;
use dce_cli::sweep::sweep;
use dce_cli::CliError;

#[derive(Parser)]
#[command(name = "dce", version, about = "Double cavity spectrum, photon creation and entanglement")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Admissible wavenumbers, optionally scanned over dL/L or alpha/L.
    Spectrum {
        #[command(flatten)]
        params: SpectrumParams,
        #[command(flatten)]
        output: OutputSpec,
    },
    /// First and second displacement couplings.
    Couplings {
        #[command(flatten)]
        params: CouplingsParams,
        #[command(flatten)]
        output: OutputSpec,
    },
    /// Photon numbers from the exact mode equations.
    Evolve {
        #[command(flatten)]
        params: DriveParams,
        #[command(flatten)]
        output: OutputSpec,
    },
    /// Photon numbers from the slow-amplitude equations or a closed form.
    Msa {
        #[command(flatten)]
        params: MsaParams,
        #[command(flatten)]
        output: OutputSpec,
    },
    /// Log-negativity maps between left and right local modes.
    Entangle {
        #[command(flatten)]
        params: EntangleParams,
        #[command(flatten)]
        output: OutputSpec,
    },
    /// Map a circuit description (JSON) onto cavity parameters.
    CircuitMap {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        output: OutputSpec,
    },
    /// Run a JSON config file.
    Run {
        config: PathBuf,
        /// Override the output directory of the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a JSON sweep config over the cartesian product of its axes.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the config stored in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the config JSON schema.
    Schema,
}

fn single(command: Command, output: OutputSpec) -> Result<(), CliError> {
    let cfg = RunConfig { schema_version: SCHEMA_VERSION, command, output };
    cfg.command.validate()?;
    finish(&cfg)
}

fn finish(cfg: &RunConfig) -> Result<(), CliError> {
    let (written, warnings) = run_and_write(cfg)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Cmd::Spectrum { params, output } => single(Command::Spectrum(params), output),
        Cmd::Couplings { params, output } => single(Command::Couplings(params), output),
        Cmd::Evolve { params, output } => single(Command::Evolve(params), output),
        Cmd::Msa { params, output } => single(Command::Msa(params), output),
        Cmd::Entangle { params, output } => single(Command::Entangle(params), output),
        Cmd::CircuitMap { input, output } => {
            let circuit = serde_json::from_str(&read(&input)?).map_err(|e| CliError::config("input", e.to_string()))?;
            single(Command::CircuitMap(CircuitMapParams { circuit }), output)
        }
        Cmd::Run { config, out } => {
            let mut cfg = parse_run(&read(&config)?)?;
            if let Some(dir) = out {
                cfg.output.dir = dir;
            }
            finish(&cfg)
        }
        Cmd::Sweep { config, out } => {
            let mut cfg = parse_sweep(&read(&config)?)?;
            if let Some(dir) = out {
                cfg.output.dir = dir;
            }
            let summary = sweep(&cfg)?;
            println!("{}", summary.dir.join("index.csv").display());
            for f in &summary.failed {
                eprintln!("point {} failed: {}", f.point, f.error);
            }
            if summary.failed.is_empty() {
                Ok(())
            } else {
                let numeric = summary.failed.iter().any(|f| f.exit_code == 3);
                Err(CliError::PartialSweep { failed: summary.failed.len(), total: summary.points, numeric })
            }
        }
        Cmd::Replay { manifest, out } => {
            let mut cfg = read_manifest(&manifest)?.config;
            if let Some(dir) = out {
                cfg.output.dir = dir;
            }
            cfg.command.validate()?;
            finish(&cfg)
        }
        Cmd::Schema => {
            print!("{SCHEMA}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
