use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use padmm::diagnostics::BurnIn;
use padmm_cli::commands::{cmd_rate, cmd_run, cmd_verify, EXIT_ERROR};

#[derive(Parser)]
#[command(name = "padmm", version, about = "Run, verify and rate-fit proximal ADMM solves")]
struct Cli {
    /// Override the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve; exit 0 when converged, 2 at the iteration cap, 1 on error.
    Run { config: PathBuf },
    /// Solve with full checks; exit 0 iff every enforced check passes.
    Verify { config: PathBuf },
    /// Fit the convergence-rate regime of a trace's L_bar column.
    Rate {
        trace: PathBuf,
        /// Fixed burn-in index instead of the first point below a tenth of e_1.
        #[arg(long)]
        burn_in: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let result = match &cli.command {
        Command::Run { config } => cmd_run(config, cli.seed, &mut stdout),
        Command::Verify { config } => cmd_verify(config, cli.seed, &mut stdout),
        Command::Rate { trace, burn_in } => {
            let policy = burn_in.map_or(BurnIn::TenthOfFirst, BurnIn::Fixed);
            cmd_rate(trace, policy, &mut stdout)
        }
    };
    let code = result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        EXIT_ERROR
    });
    ExitCode::from(code as u8)
}
