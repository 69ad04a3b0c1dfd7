//! Experiment harness over `trapcascade`: JSON configs in, `results.csv`,
//! `summary.json` and `plotdata/*.tsv` out.

pub mod checks;
pub mod config;
pub mod report;

pub use config::{Command, ConfigError, ExperimentConfig};
pub use report::{Check, Report, Structural};

/// Runs `command` on the current rayon pool. A failing simulation keeps the
/// rows already produced and records the error in the report.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Report {
    let header: Vec<String> = match command {
        Command::Simulate => checks::simulate::header(cfg.simulate.m.len()),
        Command::RaceCheck => owned(checks::race::HEADER),
        Command::EquilibriumCheck => owned(checks::equilibrium::HEADER),
        Command::DlCheck => owned(checks::dl::HEADER),
        Command::LaplaceCheck => owned(checks::laplace::HEADER),
        Command::AgingCheck => owned(checks::aging::HEADER),
        Command::LimitsCheck => owned(checks::limits::HEADER),
        Command::SelfsimCheck => owned(checks::selfsim::HEADER),
    };
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut report = Report::new(command, cfg.effective(command), &refs);
    let seed = cfg.seed;
    let outcome = match command {
        Command::Simulate => checks::simulate::run(&cfg.simulate, seed, &mut report),
        Command::RaceCheck => checks::race::run(&cfg.race, seed, &mut report),
        Command::EquilibriumCheck => checks::equilibrium::run(&cfg.equilibrium, seed, &mut report),
        Command::DlCheck => checks::dl::run(&cfg.dl, seed, &mut report),
        Command::LaplaceCheck => checks::laplace::run(&cfg.laplace, seed, &mut report),
        Command::AgingCheck => checks::aging::run(&cfg.aging, seed, &mut report),
        Command::LimitsCheck => checks::limits::run(&cfg.limits, seed, &mut report),
        Command::SelfsimCheck => checks::selfsim::run(&cfg.selfsim, seed, &mut report),
    };
    if let Err(e) = outcome {
        report.error = Some(e.to_string());
    }
    report
}

/// [`run`] on a dedicated pool of `cfg.workers` threads.
pub fn run_with_workers(command: Command, cfg: &ExperimentConfig) -> Result<Report, rayon::ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
    Ok(pool.install(|| run(command, cfg)))
}

fn owned(h: &[&str]) -> Vec<String> {
    h.iter().map(|s| s.to_string()).collect()
}
