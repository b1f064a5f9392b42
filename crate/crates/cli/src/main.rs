//! `magframe <experiment> --config <path> [--out <dir>] [--seed <u64>]`

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use magframe_cli::{parse_config, run, threads_from_env, Experiment};

#[derive(Debug, Parser)]
#[command(name = "magframe", version, about = "Run a magframe verification experiment")]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Experiment,
    /// TOML config; an empty file selects all defaults.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn execute(args: &Args) -> Result<u8, (u8, String)> {
    let threads = threads_from_env().map_err(|e| (2, e.to_string()))?;
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| (1, e.to_string()))?;
    }
    // Dense products parallelise over fixed blocks; faer's own splitting
    // depends on the thread count.
    faer::set_global_parallelism(faer::Par::Seq);
    let mut config = parse_config(&args.config, args.experiment).map_err(|e| (2, e.to_string()))?;
    if let Some(out) = &args.out {
        config.out = out.clone();
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let report = run(&config).map_err(|e| (e.exit_code() as u8, e.to_string()))?;
    for c in &report.checks {
        println!("{}", c.line());
    }
    if report.passed {
        Ok(0)
    } else {
        for c in report.failures() {
            eprintln!("assertion failed: {} = {:e} exceeds {:e}", c.name, c.value, c.tolerance);
        }
        Ok(1)
    }
}
