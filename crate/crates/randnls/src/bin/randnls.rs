//! Thin CLI over [`randnls::harness`].
//!
//! Exit codes: `0` success, `1` unknown subcommand, `2` config/validation
//! failure, `3` numerical abort.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use randnls::harness::{self, Command, RunOptions};

#[derive(Parser)]
#[command(
    name = "randnls",
    version,
    about = "Randomized data for the periodic cubic Schrödinger equation",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// Path to the JSON run configuration.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory for results.json, manifest.json, and CSV/snapshot files.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads (overrides the RANDNLS_WORKERS environment variable).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Replace randomization.seed from the config.
    #[arg(long, global = true, value_name = "SEED")]
    seed_override: Option<u64>,

    /// Suppress progress chatter on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Sub {
    /// Lebesgue/Sobolev/modulation/Besov norms of a configured field.
    Norms,
    /// Unit-cube randomization of a configured field, with truncation report.
    Randomize,
    /// Split-step evolution with a conserved-quantity table.
    Evolve,
    /// Monte Carlo tail estimate of a statistic under randomization.
    Tail,
    /// Space-time-to-data norm ratios over a family of free evolutions.
    Strichartz,
    /// Bilinear product bounds for pairs of frequency blocks.
    Bilinear,
    /// p-variation norm of a step function.
    Pvar,
    /// Scaling/randomization/evolution pipeline over a list of dilations.
    Dilate,
}

impl Sub {
    fn command(&self) -> Command {
        match self {
            Sub::Norms => Command::Norms,
            Sub::Randomize => Command::Randomize,
            Sub::Evolve => Command::Evolve,
            Sub::Tail => Command::Tail,
            Sub::Strichartz => Command::Strichartz,
            Sub::Bilinear => Command::Bilinear,
            Sub::Pvar => Command::Pvar,
            Sub::Dilate => Command::Dilate,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::from(0)
                }
                ErrorKind::InvalidSubcommand | ErrorKind::UnknownArgument
                    if e.to_string().contains("subcommand") =>
                {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
                ErrorKind::InvalidSubcommand => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(2)
                }
            };
        }
    };

    let Some(config) = cli.config else {
        eprintln!("error: --config <FILE> is required");
        return ExitCode::from(2);
    };
    let Some(out) = cli.out else {
        eprintln!("error: --out <DIR> is required");
        return ExitCode::from(2);
    };
    let opts = RunOptions {
        workers: cli.workers,
        seed_override: cli.seed_override,
        quiet: cli.quiet,
    };

    match harness::run(cli.command.command(), &config, &out, &opts) {
        Ok(_) => ExitCode::from(0),
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(u8::try_from(failure.exit_code()).unwrap_or(2))
        }
    }
}
