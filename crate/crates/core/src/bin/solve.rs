use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vaxgame::scenario::{self, Command, Scenario, ScenarioError};

#[derive(Parser)]
#[command(name = "solve", about = "Vaccination game solver", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pure Nash equilibrium per cost and weighting
    Pne(Io),
    /// Social optimum and equilibrium inefficiency per cost
    Opt(Io),
    /// Analytic threshold bounds for power-law populations
    Bounds(Io),
    /// DBMF trajectory for a fixed social state
    Dynamics(Io),
}

#[derive(clap::Args)]
struct Io {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn execute(command: Command, io: &Io) -> Result<(), ScenarioError> {
    let scenario = Scenario::load(&io.scenario)?;
    let table = scenario::run(command, &scenario)?;
    let body = match io.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    std::fs::write(&io.out, body)
        .map_err(|e| ScenarioError::Io { path: io.out.display().to_string(), message: e.to_string() })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, io) = match &cli.command {
        Cmd::Pne(io) => (Command::Pne, io),
        Cmd::Opt(io) => (Command::Opt, io),
        Cmd::Bounds(io) => (Command::Bounds, io),
        Cmd::Dynamics(io) => (Command::Dynamics, io),
    };
    match execute(command, io) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = serde_json::json!({"error": {"kind": e.kind(), "message": e.to_string()}});
            eprintln!("{report}");
            ExitCode::FAILURE
        }
    }
}
