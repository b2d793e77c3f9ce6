use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vscreg_cli::{cmd_mdp, cmd_solve, cmd_sweep, cmd_verify, Exit};

/// Convex variational regularization: solves, discrepancy-principle
/// parameter choice and noise sweeps.
#[derive(Parser)]
#[command(name = "vscreg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the Tikhonov functional for a fixed alpha.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select alpha by the discrepancy principle.
    Mdp {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a noise sweep and write report.json and records.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Recompute the checklist of a stored sweep report.
    Verify {
        #[arg(long)]
        report: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Exit::ConfigError.code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Solve { config, alpha, out } => cmd_solve(config, *alpha, out),
        Command::Mdp { config, out } => cmd_mdp(config, out),
        Command::Sweep { config, out_dir } => cmd_sweep(config, out_dir),
        Command::Verify { report } => cmd_verify(report),
    };
    let exit = result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit()
    });
    ExitCode::from(exit.code() as u8)
}
