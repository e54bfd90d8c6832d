use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use apqsm::{preset, run_channel, run_compare, run_optimize, run_sweep, ExperimentConfig, RunOptions, RunReport};
use clap::{Args, Parser, Subcommand};

/// Exit status when outputs were written but some Monte Carlo points ran out
/// of trials before collecting enough errors.
const EXIT_UNRELIABLE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "apqsm", version, about = "APQ spatial modulation for indoor VLC: channels, SER sweeps, power-split optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the channel matrix of every configured setup.
    Channel(Common),
    /// Simulate SER curves with their analytic bounds.
    Sweep(Common),
    /// Optimize the APQ power split and compare it against fixed and random splits.
    Optimize(Common),
    /// Simulate several schemes of equal spectral efficiency side by side.
    Compare(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config file, or `preset:<name>` for a built-in preset.
    #[arg(long)]
    config: String,
    /// Master seed. Overrides APQSM_SEED and the config file.
    #[arg(long, env = "APQSM_SEED")]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo. Results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    /// Exit 0 even when some points are flagged unreliable.
    #[arg(long)]
    allow_unreliable: bool,
    /// Output directory. Overrides `output.dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(c: &Common) -> Result<(ExperimentConfig, RunOptions)> {
    let mut cfg = match c.config.strip_prefix("preset:") {
        Some(name) => preset(name).with_context(|| format!("unknown preset `{name}`"))?,
        None => {
            let text = std::fs::read_to_string(&c.config).with_context(|| format!("reading {}", c.config))?;
            ExperimentConfig::from_json(&text).with_context(|| format!("in {}", c.config))?
        }
    };
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    let workers = c
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    anyhow::ensure!(workers >= 1, "--workers must be at least 1");
    let out_dir = c.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    Ok((cfg, RunOptions { workers, out_dir }))
}

type Runner = fn(&ExperimentConfig, &RunOptions) -> apqsm::Result<RunReport>;

fn run(cli: &Cli) -> Result<(RunReport, bool)> {
    let (common, runner): (&Common, Runner) = match &cli.command {
        Command::Channel(c) => (c, run_channel),
        Command::Sweep(c) => (c, run_sweep),
        Command::Optimize(c) => (c, run_optimize),
        Command::Compare(c) => (c, run_compare),
    };
    let (cfg, opts) = load(common)?;
    eprintln!(
        "{}: seed {}, {} worker(s), writing to {}",
        if cfg.name.is_empty() { "run" } else { &cfg.name },
        cfg.seed,
        opts.workers,
        opts.out_dir.display()
    );
    let report = runner(&cfg, &opts)?;
    Ok((report, common.allow_unreliable))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, allow)) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            for n in &report.notes {
                eprintln!("note: {n}");
            }
            if report.unreliable.is_empty() {
                return ExitCode::SUCCESS;
            }
            eprintln!("{} unreliable point(s):", report.unreliable.len());
            for u in &report.unreliable {
                eprintln!("  {u}");
            }
            if allow {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_UNRELIABLE)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
