use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};
use rqsim::{write_atomic, CliError, ScenarioConfig, Subcommand};

#[derive(Parser)]
#[command(name = "rqsim", version, about = "Chiral superconducting qubit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Chirality number of the gap texture.
    Chern(Common),
    /// Closed two-level beating.
    Beat(Common),
    /// Dephasing dynamics.
    Damp(Common),
    /// RF-driven dynamics.
    Rabi(Common),
    /// Gate-sequence script on a qubit chain.
    Chain(Common),
    /// Device size estimates.
    Device(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(sub: Subcommand, args: Common) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.set("seed", seed.to_string());
    }
    let report = sub.run(&cfg)?;
    match args.out.or_else(|| cfg.path("output_path")) {
        Some(path) => write_atomic(&path, &report),
        None => {
            print!("{report}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (sub, args) = match cli.command {
        Command::Chern(a) => (Subcommand::Chern, a),
        Command::Beat(a) => (Subcommand::Beat, a),
        Command::Damp(a) => (Subcommand::Damp, a),
        Command::Rabi(a) => (Subcommand::Rabi, a),
        Command::Chain(a) => (Subcommand::Chain, a),
        Command::Device(a) => (Subcommand::Device, a),
    };
    match run(sub, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
