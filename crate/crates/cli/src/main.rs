use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use switchdiff_cli::{run, task_names, Overrides};

/// Simulate regime-switching diffusions and check their bounds by Monte Carlo.
#[derive(Debug, Parser)]
#[command(name = "switchdiff", version, after_help = "Exit status: 0 pass, 1 fail, 2 configuration error, 3 assumption failure, 4 numerical blow-up.")]
struct Args {
    /// simulate, lemma21, moments, holding, harnack, feller, chain-marginal or truncation-check.
    subcommand: String,
    /// Scenario file (TOML).
    #[arg(short, long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    /// Worker threads for the replicas; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let overrides = Overrides { seed: args.seed, replicas: args.replicas, dt: args.dt };
    match run(&args.subcommand, &args.config, overrides) {
        Ok(out) => {
            println!("{}: {} (config {})", args.subcommand, out.summary, &out.config_hash[..12]);
            for f in &out.files {
                println!("  wrote {}", f.display());
            }
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == 2 && e.to_string().contains("unknown subcommand") {
                eprintln!("subcommands: {}", task_names().join(", "));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
