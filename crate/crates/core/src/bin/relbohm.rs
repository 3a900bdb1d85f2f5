use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use relbohm::scenario::{self, ExitStatus, RunOptions};

#[derive(Parser)]
#[command(
    name = "relbohm",
    version,
    about = "Relativistic Bohmian trajectories, surfaces and equilibrium tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write outputs here instead of the config's output_dir.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a JSON config file or a bundled scenario name.
    Run { config: String },
    /// List bundled scenarios.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::from(ExitStatus::Config.code() as u8);
        }
    }
    match cli.command {
        Command::List => {
            for b in scenario::bundled() {
                match b.config() {
                    Ok(c) => println!("{:<26} {:<20} {}", b.name, c.scenario.kind(), c.description),
                    Err(e) => println!("{:<26} {:<20} {e}", b.name, "invalid"),
                }
            }
            ExitCode::SUCCESS
        }
        Command::Run { config } => {
            let opts = RunOptions {
                output_dir: cli.output_dir,
                seed: cli.seed,
            };
            let path = PathBuf::from(&config);
            let result = match scenario::find_bundled(&config) {
                Some(b) if !path.exists() => b.config().and_then(|c| scenario::run(c, &opts)),
                _ => scenario::run_file(&path, &opts),
            };
            let status = match result {
                Ok(outcome) => {
                    let verdict = if outcome.pass { "ok" } else { "FAILED" };
                    println!("{verdict}: {}", outcome.message);
                    println!("outputs: {}", outcome.output_dir.display());
                    outcome.status()
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitStatus::of_error(&e)
                }
            };
            ExitCode::from(status.code() as u8)
        }
    }
}
