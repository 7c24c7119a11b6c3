//! Command-line front end: wires config documents to the experiment library.
//!
//! Exit codes: 0 = ran and every criterion passed; 1 = ran but at least one
//! criterion failed (per-criterion verdicts in `summary.json`); 2 = config,
//! validation, or IO error before results existed. Errors print a
//! human-readable line on stderr and a machine-readable JSON record on
//! stdout.

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use ridgekern_experiments::{
    run_experiment, validate_experiment, write_outcome, ExperimentError, RootConfig, RunOptions,
};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "ridgekern",
    version,
    about = "Ridge-kernel averaging experiments: measure-averaged kernels, conic synthesis, and random-kernel networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config document (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory; all artifacts stay inside it
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Replaces the config's master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores); outputs do not depend on this
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Suppress progress lines (exit code and summary.json still tell all)
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a config, echoing the resolved components
    #[command(name = "validate-config")]
    ValidateConfig(CommonArgs),
    /// Monte Carlo L2 rate sweep
    #[command(name = "mc-rate")]
    McRate(CommonArgs),
    /// Uniform-bound coverage
    #[command(name = "uniform-bound")]
    UniformBound(CommonArgs),
    /// Polynomial/universal expressivity dichotomy
    Dichotomy(CommonArgs),
    /// Coefficient smoothing composition
    Smoothing(CommonArgs),
    /// Pathwise-indefinite versus mean-p.d. contrast
    #[command(name = "psd-contrast")]
    PsdContrast(CommonArgs),
    /// Kernel synthesis gap report
    Synth(CommonArgs),
    /// Train a random-kernel network on a CSV dataset
    Train(CommonArgs),
    /// Predict with a saved model on CSV points
    Predict(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::ValidateConfig(a)
            | Command::McRate(a)
            | Command::UniformBound(a)
            | Command::Dichotomy(a)
            | Command::Smoothing(a)
            | Command::PsdContrast(a)
            | Command::Synth(a)
            | Command::Train(a)
            | Command::Predict(a) => a,
        }
    }

    fn experiment_name(&self) -> Option<&'static str> {
        match self {
            Command::ValidateConfig(_) => None,
            Command::McRate(_) => Some("mc-rate"),
            Command::UniformBound(_) => Some("uniform-bound"),
            Command::Dichotomy(_) => Some("dichotomy"),
            Command::Smoothing(_) => Some("smoothing"),
            Command::PsdContrast(_) => Some("psd-contrast"),
            Command::Synth(_) => Some("synth"),
            Command::Train(_) => Some("train"),
            Command::Predict(_) => Some("predict"),
        }
    }
}

fn error_record(kind: &str, message: &str) -> String {
    serde_json::to_string(&serde_json::json!({
        "error": { "kind": kind, "message": message }
    }))
    .expect("error record serializes")
}

fn fail(kind: &str, message: String) -> ExitCode {
    eprintln!("error: {message}");
    println!("{}", error_record(kind, &message));
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = cli.command.args();

    let text = match std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))
    {
        Ok(t) => t,
        Err(e) => return fail("io", format!("{e:#}")),
    };
    let cfg = match RootConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return fail("config", e.to_string()),
    };

    if let Some(expected) = cli.command.experiment_name() {
        if cfg.experiment != expected {
            return fail(
                "config",
                format!(
                    "config declares experiment `{}` but the subcommand is `{expected}`",
                    cfg.experiment
                ),
            );
        }
    }

    let opts = RunOptions {
        master_seed: args.seed.unwrap_or(cfg.master_seed),
        jobs: args.jobs,
        quiet: args.quiet,
        config_dir: args
            .config
            .parent()
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".")),
    };

    if matches!(cli.command, Command::ValidateConfig(_)) {
        return match validate_experiment(&cfg) {
            Ok(echo) => {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "experiment": cfg.experiment,
                        "master_seed": opts.master_seed,
                        "resolved": echo,
                    }))
                    .expect("echo serializes")
                );
                ExitCode::SUCCESS
            }
            Err(e) => fail(error_kind(&e), e.to_string()),
        };
    }

    let start = Instant::now();
    let outcome = match run_experiment(&cfg, &opts) {
        Ok(o) => o,
        Err(e) => return fail(error_kind(&e), e.to_string()),
    };
    let wall = start.elapsed().as_secs_f64();
    let summary_path = match write_outcome(&outcome, &cfg.params, opts.master_seed, &args.out, wall)
    {
        Ok(p) => p,
        Err(e) => return fail("io", e.to_string()),
    };

    if !args.quiet {
        for v in &outcome.criteria {
            println!(
                "{} {}: {}",
                if v.passed { "PASS" } else { "FAIL" },
                v.name,
                v.detail
            );
        }
        println!("summary: {}", summary_path.display());
    }
    if outcome.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn error_kind(e: &ExperimentError) -> &'static str {
    match e {
        ExperimentError::Config(_) => "config",
        ExperimentError::Unresolved(_) => "unresolved",
        ExperimentError::Hypothesis(_) => "hypothesis",
        ExperimentError::Io(_) => "io",
        ExperimentError::Core(_) => "core",
    }
}
