use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod report;

use report::Report;

/// Purity-testing code families, exact soundness tables, and dense
/// simulation of the quantum authentication scheme.
#[derive(Parser, Debug)]
#[command(name = "qauth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for keys, probes and random adversaries; echoed into every report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output path. For `family` and `keygen` this receives the artifact;
    /// `send` requires it for the envelope.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Omit the timestamp field so reruns compare byte for byte.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Where the code family comes from: a family file, or `--r/--s`.
#[derive(Args, Debug, Clone, Default)]
pub struct FamilyArgs {
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long)]
    pub s: Option<u32>,
    /// Family file written by `qauth family --out`.
    #[arg(long)]
    pub family: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the code family for (r, s).
    Family {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        s: u32,
    },
    /// Exhaustive epsilon table.
    Epsilon {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Per-key verdicts for one Pauli attack, or the exhaustive maximum.
    Attack {
        #[command(flatten)]
        family: FamilyArgs,
        /// Pauli string over I, X, Y, Z, qubit 0 first.
        #[arg(
            long,
            conflicts_with = "exhaustive",
            required_unless_present = "exhaustive"
        )]
        error: Option<String>,
        #[arg(long)]
        exhaustive: bool,
    },
    /// Dense-simulation suites.
    DenseVerify {
        #[arg(value_enum)]
        suite: commands::Suite,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        cases: Option<usize>,
    },
    /// Lower-bound demonstrations.
    Lowerbound {
        #[arg(value_enum)]
        demo: commands::Demo,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        cases: Option<usize>,
    },
    /// Draw a key from the seed.
    Keygen {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Authenticate a computational-basis message into an envelope file.
    Send {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        key: PathBuf,
        /// Bits, qubit 0 first; zero qubits are appended up to m.
        #[arg(long, default_value = "")]
        message: String,
    },
    /// Verify an envelope, optionally after applying a Pauli in transit.
    Receive {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        envelope: PathBuf,
        #[arg(long)]
        error: Option<String>,
    },
}

fn run(cli: &Cli) -> anyhow::Result<Report> {
    let seed = cli.seed;
    match &cli.command {
        Command::Family { r, s } => commands::family(*r, *s, seed, cli.format, cli.out.as_deref()),
        Command::Epsilon { family } => commands::epsilon(family, seed),
        Command::Attack {
            family,
            error,
            exhaustive,
        } => commands::attack(family, seed, error.as_deref(), *exhaustive),
        Command::DenseVerify {
            suite,
            family,
            cases,
        } => commands::dense_verify(*suite, family, seed, *cases),
        Command::Lowerbound {
            demo,
            family,
            cases,
        } => commands::lowerbound(*demo, family, seed, *cases),
        Command::Keygen { family } => commands::keygen(family, seed, cli.out.as_deref()),
        Command::Send {
            family,
            key,
            message,
        } => commands::send(family, seed, key, message, cli.out.as_deref()),
        Command::Receive {
            key,
            envelope,
            error,
        } => commands::receive(key, envelope, error.as_deref(), seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let to_file = !matches!(
                cli.command,
                Command::Family { .. } | Command::Keygen { .. } | Command::Send { .. }
            );
            let text = report.render(cli.format, !cli.no_timestamp);
            let written = match (&cli.out, to_file) {
                (Some(path), true) => std::fs::write(path, text).map_err(anyhow::Error::from),
                _ => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
