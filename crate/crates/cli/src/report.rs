//! What a command produces and how it lands on disk.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};
use trapcascade::InvariantReport;

use crate::config::Command;

/// One pass/fail decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

/// `(x, y, yerr)` rows for `plotdata/<name>.tsv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plot {
    pub name: String,
    pub points: Vec<[f64; 3]>,
}

/// Structural invariant counts over everything a command simulated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Structural {
    pub trajectories: usize,
    pub paths: InvariantReport,
    pub races: usize,
    pub race_violations: usize,
}

impl Structural {
    pub fn violations(&self) -> usize {
        self.paths.violations() + self.race_violations
    }

    pub fn add_paths(&mut self, count: usize, report: &InvariantReport) {
        self.trajectories += count;
        self.paths.merge(report);
    }

    pub fn merge(&mut self, other: &Structural) {
        self.trajectories += other.trajectories;
        self.paths.merge(&other.paths);
        self.races += other.races;
        self.race_violations += other.race_violations;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub config: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub estimates: Map<String, Value>,
    pub checks: Vec<Check>,
    pub plots: Vec<Plot>,
    pub structural: Structural,
    /// Extra files written next to `results.csv`.
    pub attachments: Vec<(String, Vec<u8>)>,
    pub error: Option<String>,
}

/// Shortest round-trip decimal form, the same on every platform.
pub fn num(x: f64) -> String {
    format!("{x}")
}

impl Report {
    pub fn new(command: Command, config: Value, header: &[&str]) -> Self {
        Self {
            command,
            config,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            estimates: Map::new(),
            checks: Vec::new(),
            plots: Vec::new(),
            structural: Structural::default(),
            attachments: Vec::new(),
            error: None,
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn estimate(&mut self, key: impl Into<String>, value: impl Serialize) {
        self.estimates
            .insert(key.into(), serde_json::to_value(value).expect("estimates serialize"));
    }

    /// Records `value <= threshold`.
    pub fn check_at_most(&mut self, name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed: value <= threshold,
            value,
            threshold,
            detail: detail.into(),
        });
    }

    pub fn check_flag(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            value: if passed { 1.0 } else { 0.0 },
            threshold: 1.0,
            detail: detail.into(),
        });
    }

    pub fn plot(&mut self, name: impl Into<String>, points: Vec<[f64; 3]>) {
        self.plots.push(Plot {
            name: name.into(),
            points,
        });
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.structural.violations() == 0 && self.checks.iter().all(|c| c.passed)
    }

    pub fn summary(&self) -> Value {
        serde_json::json!({
            "command": self.command.name(),
            "config": self.config,
            "estimates": self.estimates,
            "checks": self.checks,
            "structural": self.structural,
            "passed": self.passed(),
            "error": self.error,
        })
    }

    fn csv_bytes(&self) -> io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| io::Error::other(e.to_string()))
    }

    /// Writes `results.csv`, `summary.json`, `plotdata/*.tsv` and any
    /// attachments under `dir`.
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir.join("plotdata"))?;
        fs::write(dir.join("results.csv"), self.csv_bytes()?)?;
        let mut summary = serde_json::to_string_pretty(&self.summary())?;
        summary.push('\n');
        fs::write(dir.join("summary.json"), summary)?;
        for p in &self.plots {
            let mut text = String::from("x\ty\tyerr\n");
            for [x, y, e] in &p.points {
                text.push_str(&format!("{}\t{}\t{}\n", num(*x), num(*y), num(*e)));
            }
            fs::write(dir.join("plotdata").join(format!("{}.tsv", p.name)), text)?;
        }
        for (name, bytes) in &self.attachments {
            fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }
}
