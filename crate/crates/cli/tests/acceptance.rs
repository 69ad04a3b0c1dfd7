//! The ten acceptance criteria, each on the default seed.
//!
//! Every criterion prints one `PASS`/`FAIL` line to stderr, captured or not.
//! Runs are memoised and serialised so the reported runtimes are wall-clock
//! times of a single command.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

use trapcascade_cli::{run_with_workers, Command, ExperimentConfig, Report, Structural};

struct Criterion {
    title: &'static str,
    command: Command,
    config: &'static str,
    max_seconds: f64,
}

const CRITERIA: [Criterion; 9] = [
    Criterion {
        title: "race law",
        command: Command::RaceCheck,
        config: "{}",
        max_seconds: 10.0,
    },
    Criterion {
        title: "equilibrium",
        command: Command::EquilibriumCheck,
        config: "{}",
        max_seconds: 120.0,
    },
    Criterion {
        title: "simulator equivalence",
        command: Command::Simulate,
        config: "{}",
        max_seconds: 120.0,
    },
    Criterion {
        title: "k=1 aging limit",
        command: Command::AgingCheck,
        config: "{}",
        max_seconds: 300.0,
    },
    Criterion {
        title: "k=2 aging limit",
        command: Command::AgingCheck,
        config: r#"{"aging": {
            "provider": {"kind": "aging_process", "alphas": [0.5, 0.3], "eps": 1e-4},
            "level": 2, "t_w": 1, "thetas": [0.5, 1, 2], "replicas": 10000,
            "abs_tol": 0.03, "mc_samples": 10000000, "mc_tol": 1e-3}}"#,
        max_seconds: 600.0,
    },
    Criterion {
        title: "Dynkin-Lamperti",
        command: Command::DlCheck,
        config: "{}",
        max_seconds: 300.0,
    },
    Criterion {
        title: "Laplace exponent",
        command: Command::LaplaceCheck,
        config: "{}",
        max_seconds: 60.0,
    },
    Criterion {
        title: "self-similarity",
        command: Command::SelfsimCheck,
        config: "{}",
        max_seconds: 180.0,
    },
    Criterion {
        title: "ergodic-regime convergence",
        command: Command::LimitsCheck,
        config: "{}",
        max_seconds: 600.0,
    },
];

struct Run {
    report: Report,
    seconds: f64,
    dir: PathBuf,
}

static SERIAL: Mutex<()> = Mutex::new(());
static RUNS: [OnceLock<Run>; 9] = [const { OnceLock::new() }; 9];

fn config(c: &Criterion, workers: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_json(c.config).expect("criterion config parses");
    cfg.workers = workers;
    cfg.validate(c.command).expect("criterion config is valid");
    cfg
}

fn out_dir(index: usize, tag: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(format!("c{}-{tag}", index + 1));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn execute(index: usize, workers: usize, tag: &str) -> Run {
    let c = &CRITERIA[index];
    let cfg = config(c, workers);
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let report = run_with_workers(c.command, &cfg).expect("thread pool");
    let seconds = start.elapsed().as_secs_f64();
    let dir = out_dir(index, tag);
    report.write(&dir).expect("report written");
    Run { report, seconds, dir }
}

fn first_run(index: usize) -> &'static Run {
    RUNS[index].get_or_init(|| execute(index, 1, "a"))
}

fn say(line: String) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

fn criterion(index: usize) {
    let c = &CRITERIA[index];
    let run = first_run(index);
    let r = &run.report;
    let in_time = run.seconds < c.max_seconds;
    let passed = r.passed() && in_time;
    let mut failures: Vec<String> = r
        .failed_checks()
        .map(|f| format!("{} = {} (limit {}) {}", f.name, f.value, f.threshold, f.detail))
        .collect();
    if let Some(e) = &r.error {
        failures.push(format!("error: {e}"));
    }
    if r.structural.violations() > 0 {
        failures.push(format!("structural: {:?}", r.structural));
    }
    if !in_time {
        failures.push(format!("runtime {:.1}s over {}s", run.seconds, c.max_seconds));
    }
    say(format!(
        "criterion {:>2} {}: {} ({} checks, {:.1}s){}",
        index + 1,
        c.title,
        if passed { "PASS" } else { "FAIL" },
        r.checks.len(),
        run.seconds,
        if failures.is_empty() { String::new() } else { format!(" [{}]", failures.join("; ")) }
    ));
    assert!(passed, "criterion {} failed: {}", index + 1, failures.join("; "));
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).expect("readable output dir") {
            let p = entry.expect("dir entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

/// File names that differ between two output directories.
fn differences(a: &Path, b: &Path) -> Vec<String> {
    let (fa, fb) = (files(a), files(b));
    if fa != fb {
        return vec![format!("file sets {fa:?} and {fb:?}")];
    }
    fa.iter()
        .filter(|f| fs::read(a.join(f)).unwrap() != fs::read(b.join(f)).unwrap())
        .map(|f| f.display().to_string())
        .collect()
}

#[test]
fn criterion_01_race_law() {
    criterion(0);
}

#[test]
fn criterion_02_equilibrium() {
    criterion(1);
}

#[test]
fn criterion_03_simulator_equivalence() {
    criterion(2);
}

#[test]
fn criterion_04_aging_k1() {
    criterion(3);
}

#[test]
fn criterion_05_aging_k2() {
    criterion(4);
}

#[test]
fn criterion_06_dynkin_lamperti() {
    criterion(5);
}

#[test]
fn criterion_07_laplace_exponent() {
    criterion(6);
}

#[test]
fn criterion_08_self_similarity() {
    criterion(7);
}

#[test]
fn criterion_09_ergodic_convergence() {
    criterion(8);
}

/// Invariant counts over every run above, plus a second run of each on a
/// four-thread pool that must write the same bytes.
#[test]
fn criterion_10_structural_invariants() {
    let mut total = Structural::default();
    let mut problems = Vec::new();
    let mut seconds = 0.0;
    for index in 0..CRITERIA.len() {
        let a = first_run(index);
        total.merge(&a.report.structural);
        let b = execute(index, 4, "b");
        seconds += a.seconds + b.seconds;
        let diff = differences(&a.dir, &b.dir);
        if !diff.is_empty() {
            problems.push(format!("criterion {} not reproducible: {}", index + 1, diff.join(", ")));
        }
    }
    if total.violations() > 0 {
        problems.push(format!("{total:?}"));
    }
    let passed = problems.is_empty();
    say(format!(
        "criterion 10 structural invariants: {} ({} trajectories, {} segments, {} boundaries, {} races, {} violations, 9 runs repeated, {:.1}s){}",
        if passed { "PASS" } else { "FAIL" },
        total.trajectories,
        total.paths.segments,
        total.paths.boundaries,
        total.races,
        total.violations(),
        seconds,
        if passed { String::new() } else { format!(" [{}]", problems.join("; ")) }
    ));
    assert!(passed, "{}", problems.join("; "));
}
