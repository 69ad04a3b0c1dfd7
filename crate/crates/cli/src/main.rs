use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use trapcascade_cli::{run_with_workers, Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "trapcascade", version, about = "Trap-model simulations and their aging checks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Direct trap-model runs against the cascading construction.
    Simulate(RunArgs),
    /// Stopping law, sojourns and overshoots of the exponential race.
    RaceCheck(RunArgs),
    /// Closed-form equilibrium, generator null vector and a long direct run.
    EquilibriumCheck(RunArgs),
    /// Straddling range points of truncated stable subordinators.
    DlCheck(RunArgs),
    /// Laplace exponent of the rescaled depth sum.
    LaplaceCheck(RunArgs),
    /// Aging functions against their Beta-product limits.
    AgingCheck(RunArgs),
    /// Ergodic-regime convergence to the K-process.
    LimitsCheck(RunArgs),
    /// Scale invariance of the aging process.
    SelfsimCheck(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; every field is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replica count for the selected command.
    #[arg(long)]
    replicas: Option<u64>,
}

impl Cmd {
    fn split(self) -> (Command, RunArgs) {
        match self {
            Cmd::Simulate(a) => (Command::Simulate, a),
            Cmd::RaceCheck(a) => (Command::RaceCheck, a),
            Cmd::EquilibriumCheck(a) => (Command::EquilibriumCheck, a),
            Cmd::DlCheck(a) => (Command::DlCheck, a),
            Cmd::LaplaceCheck(a) => (Command::LaplaceCheck, a),
            Cmd::AgingCheck(a) => (Command::AgingCheck, a),
            Cmd::LimitsCheck(a) => (Command::LimitsCheck, a),
            Cmd::SelfsimCheck(a) => (Command::SelfsimCheck, a),
        }
    }
}

fn configure(command: Command, args: RunArgs) -> Result<ExperimentConfig, trapcascade_cli::ConfigError> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(o) = args.out {
        cfg.output_dir = o;
    }
    if args.replicas.is_some() {
        cfg.replicas = args.replicas;
    }
    cfg.apply_replicas(command);
    cfg.validate(command)?;
    Ok(cfg)
}

fn execute(command: Command, cfg: &ExperimentConfig) -> anyhow::Result<bool> {
    let report = run_with_workers(command, cfg).context("building the worker pool")?;
    report
        .write(&cfg.output_dir)
        .with_context(|| format!("writing results to {}", cfg.output_dir.display()))?;
    for c in report.failed_checks() {
        eprintln!("FAIL {}: {} > {} ({})", c.name, c.value, c.threshold, c.detail);
    }
    if report.structural.violations() > 0 {
        eprintln!("FAIL structural invariants: {:?}", report.structural);
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    let passed = report.passed();
    eprintln!(
        "{} {}: {} checks, {} rows -> {}",
        if passed { "PASS" } else { "FAIL" },
        command.name(),
        report.checks.len(),
        report.rows.len(),
        cfg.output_dir.display()
    );
    Ok(passed)
}

fn main() -> ExitCode {
    let (command, args) = Cli::parse().command.split();
    let cfg = match configure(command, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match execute(command, &cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
