use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fefp::config::SimulationConfig;
use fefp::scenario::{run, RunOptions};

#[derive(Parser)]
#[command(name = "fefp", version, about = "Particle Fokker-Planck simulations of rarefied gas flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML config file.
    Run {
        config: PathBuf,
        /// Override the seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory from the config.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Worker threads (default: all cores). Results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        /// Also write a matplotlib script next to the CSV output.
        #[arg(long)]
        emit_plots: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let Command::Run { config, seed, output, threads, emit_plots } = Cli::parse().command;

    let text = match std::fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match SimulationConfig::from_toml(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set thread count: {e}");
            return ExitCode::from(2);
        }
    }
    log::info!("config {} (seed {}):\n{text}", config.display(), cfg.seed);

    let dir = output.clone().unwrap_or_else(|| cfg.output_dir.clone());
    if std::fs::create_dir_all(&dir).and_then(|_| std::fs::write(dir.join("config.toml"), &text)).is_err() {
        log::warn!("could not copy the config into {}", dir.display());
    }
    let opts = RunOptions { output_dir: output, emit_plots, no_output: false };
    match run(&cfg, &opts) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
