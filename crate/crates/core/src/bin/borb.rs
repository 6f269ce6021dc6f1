use borb::config::ExperimentConfig;
use borb::runner::{run, verify, RunOptions};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Bergman kernel and random zero experiments on model orbifold curves.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments of a config file.
    Run {
        config: PathBuf,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Directory of the Gram matrix cache.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Recompute the file hashes listed in a manifest.
    Verify { manifest: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            threads,
            cache,
        } => {
            let opts = RunOptions { out, seed, threads, cache };
            let result = ExperimentConfig::load(&config).and_then(|cfg| run(&cfg, &opts));
            match result {
                Ok(m) => {
                    println!("config {}: {} files written", m.config_hash, m.files.len());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::Verify { manifest } => match verify(&manifest) {
            Ok(bad) if bad.is_empty() => {
                println!("all files match");
                ExitCode::SUCCESS
            }
            Ok(bad) => {
                for b in bad {
                    println!("mismatch: {b}");
                }
                ExitCode::from(1)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
    }
}
