use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use thermocoding_cli::{checks, example3, sweep, ExperimentConfig, SweepKind};

#[derive(Parser)]
#[command(name = "thermocoding", version, about = "Typical-subspace compression under thermal, clock and cooling limits")]
struct Cli {
    /// JSON experiment configuration; missing fields take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo samples per estimate.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Output file (stdout if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce the three-sample worked example and check it against reference values.
    Example3 {
        /// Emit JSON instead of a text report.
        #[arg(long)]
        json: bool,
    },
    /// Run a parameter sweep and write CSV.
    Sweep {
        #[arg(value_enum)]
        kind: SweepKind,
    },
    /// Run the full bound/invariant suite; exits nonzero on any violation.
    Verify,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(samples) = cli.samples {
        cfg.samples = samples;
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(cfg: &ExperimentConfig, text: &str) -> Result<()> {
    match &cfg.output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Example3 { json } => {
            let report = example3::run()?;
            let text = if *json { serde_json::to_string_pretty(&report)? + "\n" } else { report.to_string() };
            emit(&cfg, &text)?;
            Ok(report.passed())
        }
        Command::Sweep { kind } => {
            let csv = sweep::run(*kind, &cfg)?.to_csv()?;
            emit(&cfg, &csv)?;
            Ok(true)
        }
        Command::Verify => {
            let summary = checks::run_all(&cfg);
            for c in &summary.checks {
                eprintln!("{}", c.line());
            }
            emit(&cfg, &(serde_json::to_string_pretty(&summary)? + "\n"))?;
            Ok(summary.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
