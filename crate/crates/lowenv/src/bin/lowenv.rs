use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lowenv::cli as app;

#[derive(Parser)]
#[command(
    name = "lowenv",
    version,
    about = "Monte Carlo estimation of lower envelopes of expectations over \
             parametrized families of distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config file; use "-" to read from stdin
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config's seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for the CSV and JSON outputs
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker thread count (defaults to the logical CPU count)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// One lower-envelope estimate from a config
    Estimate,
    /// Replicated estimates over a grid of sample sizes
    BiasSweep,
    /// Verify a consistency route and emit a certificate
    ConsistencyCheck {
        /// One of: finite_T, lipschitz_box, gradient_box, compact_smooth,
        /// is_lipschitz_density, is_gradient_density, is_compact_bounded_f
        #[arg(long)]
        route: Option<String>,
    },
    /// Beam-on-a-spring reliability example
    ExampleBeam,
    /// Adversarial density family where importance sampling fails
    ExampleNoConsistency,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.command {
        Command::Estimate => app::Subcommand::Estimate,
        Command::BiasSweep => app::Subcommand::BiasSweep,
        Command::ConsistencyCheck { route } => app::Subcommand::ConsistencyCheck { route },
        Command::ExampleBeam => app::Subcommand::ExampleBeam,
        Command::ExampleNoConsistency => app::Subcommand::ExampleNoConsistency,
    };
    let opts = app::CliOptions {
        config: cli.config,
        seed: cli.seed,
        out_dir: cli.out_dir,
        threads: cli.threads,
    };
    match app::dispatch(&cmd, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(app::exit_code(&err))
        }
    }
}
