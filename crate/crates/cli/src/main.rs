use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fttc::{NetworkConfig, Protocol};
use fttc_cli::{load_config, run_experiment, CliError, RunSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolArg {
    Fttc,
    Baseline,
    Both,
}

/// Simulate sensor-network lifetime under trajectory-clustered and random
/// cluster heads, writing per-round metrics and a summary as CSV.
#[derive(Debug, Parser)]
#[command(name = "fttc", version)]
struct Args {
    /// `key = value` config file; missing keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    protocol: ProtocolArg,
    /// Comma-separated seeds; defaults to the config's `rng_seed`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    seeds: Vec<u64>,
    /// Fault script: one `kill <round> <node_id>` per line.
    #[arg(long)]
    faults: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    max_rounds: Option<u64>,
}

fn spec_from(args: Args) -> Result<RunSpec, CliError> {
    let mut config = match &args.config {
        Some(path) => load_config(path)?,
        None => NetworkConfig::default(),
    };
    if let Some(max) = args.max_rounds {
        config.max_rounds = max;
    }
    let seeds = if args.seeds.is_empty() {
        vec![config.rng_seed]
    } else {
        args.seeds
    };
    let protocols = match args.protocol {
        ProtocolArg::Fttc => vec![Protocol::Fttc],
        ProtocolArg::Baseline => vec![Protocol::Baseline],
        ProtocolArg::Both => vec![Protocol::Fttc, Protocol::Baseline],
    };
    Ok(RunSpec {
        config,
        protocols,
        seeds,
        fault_script_path: args.faults,
        output_dir: args.out,
    })
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = spec_from(args).and_then(|spec| run_experiment(&spec));
    match result {
        Ok(report) => {
            println!(
                "{} runs written; summary at {}",
                report.runs.len(),
                report.summary_path.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
