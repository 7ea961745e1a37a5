use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rootflow::cli::{self, RunOptions};

#[derive(Parser)]
#[command(
    name = "rootflow",
    version,
    about = "Root-flow PDE and polynomial-root-differentiation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the PDE alone and check conservation and the maximum principle.
    PdeRun(RunArgs),
    /// Evolve roots under repeated differentiation and track gap statistics.
    RootsRun(RunArgs),
    /// Alternate differentiation with PDE evolution and emit the error series.
    CoupledRun(RunArgs),
    /// Coupled runs over sweep_n with fitted scaling slopes.
    ScalingSweep(RunArgs),
    /// Error-propagation kernel rows, row sums and the F(a) majorant.
    KernelCheck(RunArgs),
    /// Gap-split prediction against one actual differentiation step.
    PredictCheck(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: config out_dir, then ./rootflow-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker bound for parallel sweeps (fallback: ROOTFLOW_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides the perturbation seed from the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (sub, args) = match cli.command {
        Command::PdeRun(a) => (cli::Subcommand::PdeRun, a),
        Command::RootsRun(a) => (cli::Subcommand::RootsRun, a),
        Command::CoupledRun(a) => (cli::Subcommand::CoupledRun, a),
        Command::ScalingSweep(a) => (cli::Subcommand::ScalingSweep, a),
        Command::KernelCheck(a) => (cli::Subcommand::KernelCheck, a),
        Command::PredictCheck(a) => (cli::Subcommand::PredictCheck, a),
    };

    let config = match cli::parse_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    let out_dir = args
        .out
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("rootflow-out"));
    let workers = args.workers.or_else(|| {
        std::env::var("ROOTFLOW_WORKERS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    let opts = RunOptions {
        out_dir,
        workers,
        seed_override: args.seed,
    };

    match cli::run_suite(sub, &config, &opts) {
        Ok(result) => {
            for check in &result.manifest.checks {
                let tag = if check.passed { "PASS" } else { "FAIL" };
                println!("[{tag}] {}: {}", check.name, check.detail);
            }
            if let Some(abort) = &result.manifest.abort {
                eprintln!("engine abort: {abort}");
            }
            println!("manifest: {}", result.manifest_path.display());
            ExitCode::from(u8::try_from(result.exit_code).unwrap_or(1))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(u8::try_from(cli::exit_code_for_error(&e)).unwrap_or(1))
        }
    }
}
