use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use skeletal::commands::{self, CliError, Options};

/// Skeletal mechanism reduction by low-rank reaction sensitivities.
#[derive(Parser)]
#[command(name = "skeletal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Campaign configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Mechanism file; overrides `mechanism` in the config
    #[arg(long)]
    mech: Option<PathBuf>,
    /// Output directory; overrides `output` in the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// Low-rank approximation rank; overrides `rank` in the config
    #[arg(long)]
    rank: Option<usize>,
    /// Worker threads across cases; 1 gives byte-identical outputs
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Accepted for symmetry with seeded tools. Every stage is deterministic.
    #[arg(long)]
    seedless: bool,
}

impl From<Common> for Options {
    fn from(c: Common) -> Options {
        Options {
            mech: c.mech,
            config: Some(c.config),
            out: c.out,
            rank: c.rank,
            jobs: c.jobs,
            seedless: c.seedless,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a mechanism file and print its size
    Check {
        mechanism: PathBuf,
    },
    /// Sensitivity runs
    Sens {
        #[command(subcommand)]
        kind: Sens,
    },
    /// Aggregate importance, rank reactions and species, write skeletal models
    Reduce(Common),
    /// Ignition delays of the detailed and skeletal models
    Validate(Common),
    /// `sens rom`, `reduce` and `validate` in sequence
    Run(Common),
    /// Print the commented configuration template
    Template,
}

#[derive(Subcommand)]
enum Sens {
    /// Dense forward sensitivities with exact singular values
    Fom(Common),
    /// Low-rank (TDB-CUR) sensitivities and reaction importance
    Rom(Common),
    /// Compare singular values and wall time of the two runs
    Compare(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<String, CliError> = match cli.command {
        Command::Check { mechanism } => commands::check(&mechanism),
        Command::Sens { kind: Sens::Fom(c) } => commands::sens_fom(&c.into()),
        Command::Sens { kind: Sens::Rom(c) } => commands::sens_rom(&c.into()),
        Command::Sens { kind: Sens::Compare(c) } => commands::sens_compare(&c.into()),
        Command::Reduce(c) => commands::reduce(&c.into()),
        Command::Validate(c) => commands::validate(&c.into()),
        Command::Run(c) => commands::pipeline(&c.into()),
        Command::Template => Ok(commands::template().to_string()),
    };
    match result {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
