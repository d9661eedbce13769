use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qrep_cli::commands::{execute_enumerate, execute_run};
use qrep_cli::config::{parse_config, ModeName, Overrides};
use qrep_cli::error::{CliError, EXIT_OK, EXIT_VALIDATION};
use qrep_cli::selftest::{cmd_selftest, SelfTestOptions};

/// Qudit teleportation repeater-chain simulator.
#[derive(Debug, Parser)]
#[command(name = "qrep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo run of one or more seeded trials.
    Run(ExperimentArgs),
    /// Exact enumeration of every measurement path.
    Enumerate(ExperimentArgs),
    /// Run the embedded acceptance checks.
    Selftest {
        #[arg(long, hide = true)]
        corrupt_hadamard: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Local,
    Deferred,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Qudit dimension, 2..=16.
    #[arg(long)]
    d: Option<usize>,
    /// Number of repeaters.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Channel probabilities p0,p1,...,p(d-1).
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// basis:<j>, uniform, random or [[re,im],...].
    #[arg(long)]
    state: Option<String>,
    /// Path budget for `enumerate`.
    #[arg(long)]
    max_paths: Option<usize>,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV dump of trial 0's transmission history.
    #[arg(long)]
    history: Option<PathBuf>,
}

impl ExperimentArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            d: self.d,
            n: self.n,
            mode: self.mode.map(|m| match m {
                ModeArg::Local => ModeName::Local,
                ModeArg::Deferred => ModeName::Deferred,
            }),
            noise: self.noise.clone(),
            seed: self.seed,
            trials: self.trials,
            state: self.state.clone(),
            max_paths: self.max_paths,
            out: self.out.clone(),
            history: self.history.clone(),
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(args) => {
            let cfg = parse_config(args.config.as_deref(), &args.overrides())?;
            execute_run(&cfg).map(drop)
        }
        Command::Enumerate(args) => {
            let cfg = parse_config(args.config.as_deref(), &args.overrides())?;
            execute_enumerate(&cfg).map(drop)
        }
        Command::Selftest { corrupt_hadamard } => {
            cmd_selftest(&SelfTestOptions { corrupt_hadamard })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            return ExitCode::from(code as u8);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
