//! `evoforge`: evolve parallel programs, synthesize training corpora,
//! benchmark generated code, and re-render past runs.

mod bench;
mod config;
mod evolve;
mod manifest;
mod report;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "evoforge",
    version,
    about = "Evolutionary search for fast, race-free parallel code"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the evolutionary search on one task.
    Evolve(evolve::EvolveArgs),
    /// Build corpus files.
    Synthesize {
        #[command(subcommand)]
        command: synth::SynthCommand,
    },
    /// Build@1 / Pass@1 / Speedup@1 over a suite, optionally with a scaling sweep.
    Bench(bench::BenchArgs),
    /// Summarize a persisted run directory.
    Report {
        #[arg(long)]
        run: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Evolve(args) => evolve::cmd_evolve(&args),
        Command::Synthesize { command } => match synth::cmd_synthesize(&command) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e:#}");
                1
            }
        },
        Command::Bench(args) => bench::cmd_bench(&args),
        Command::Report { run } => match report::render_run(&run) {
            Ok(text) => {
                print!("{text}");
                0
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                1
            }
        },
    };
    ExitCode::from(code as u8)
}
