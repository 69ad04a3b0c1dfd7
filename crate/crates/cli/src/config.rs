//! Experiment configuration, read from JSON. Every field has a default, so
//! `{}` is a valid config for every command.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trapcascade::aging::EstimatorKind;
use trapcascade::limits::{Regime, RegimeSpec};
use trapcascade::{StableSpec, VolumeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    RaceCheck,
    EquilibriumCheck,
    DlCheck,
    LaplaceCheck,
    AgingCheck,
    LimitsCheck,
    SelfsimCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::RaceCheck => "race-check",
            Command::EquilibriumCheck => "equilibrium-check",
            Command::DlCheck => "dl-check",
            Command::LaplaceCheck => "laplace-check",
            Command::AgingCheck => "aging-check",
            Command::LimitsCheck => "limits-check",
            Command::SelfsimCheck => "selfsim-check",
        }
    }
}

/// A config problem, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config field `{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for ConfigError {}

/// Rewrites a core parameter error as a config error under `section`.
fn from_core(section: &str, e: trapcascade::Error) -> ConfigError {
    match e {
        trapcascade::Error::InvalidParameter { name, reason } => ConfigError::new(format!("{section}.{name}"), reason),
        other => ConfigError::new(section, other.to_string()),
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("{v} must be positive and finite")))
    }
}

fn at_least(field: &str, v: u64, min: u64) -> Result<(), ConfigError> {
    if v >= min {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("{v} must be at least {min}")))
    }
}

fn nonempty<T>(field: &str, v: &[T]) -> Result<(), ConfigError> {
    if v.is_empty() {
        Err(ConfigError::new(field, "must not be empty"))
    } else {
        Ok(())
    }
}

fn thetas_ok(field: &str, v: &[f64]) -> Result<(), ConfigError> {
    nonempty(field, v)?;
    v.iter().try_for_each(|&t| positive(field, t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub workers: usize,
    pub output_dir: PathBuf,
    /// Overrides the replica count of the selected command.
    pub replicas: Option<u64>,
    pub race: RaceConfig,
    pub equilibrium: EquilibriumConfig,
    pub simulate: SimulateConfig,
    pub dl: DlConfig,
    pub laplace: LaplaceConfig,
    pub aging: AgingConfig,
    pub limits: LimitsConfig,
    pub selfsim: SelfsimConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            output_dir: PathBuf::from("out"),
            replicas: None,
            race: RaceConfig::default(),
            equilibrium: EquilibriumConfig::default(),
            simulate: SimulateConfig::default(),
            dl: DlConfig::default(),
            laplace: LaplaceConfig::default(),
            aging: AgingConfig::default(),
            limits: LimitsConfig::default(),
            selfsim: SelfsimConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::new(json_field(&e), e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("--config", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Pushes `replicas` into the section of `command`.
    pub fn apply_replicas(&mut self, command: Command) {
        let Some(r) = self.replicas else { return };
        match command {
            Command::Simulate => self.simulate.replicas = r,
            Command::RaceCheck => self.race.replicas = r,
            Command::DlCheck => self.dl.replicas = r,
            Command::AgingCheck => self.aging.replicas = r,
            Command::LimitsCheck => self.limits.replicas = r,
            Command::SelfsimCheck => self.selfsim.replicas = r,
            // these have seeds and steps rather than replicas
            Command::EquilibriumCheck | Command::LaplaceCheck => {}
        }
    }

    pub fn validate(&self, command: Command) -> Result<(), ConfigError> {
        if self.workers == 0 {
            return Err(ConfigError::new("workers", "must be at least 1"));
        }
        match command {
            Command::Simulate => self.simulate.validate(),
            Command::RaceCheck => self.race.validate(),
            Command::EquilibriumCheck => self.equilibrium.validate(),
            Command::DlCheck => self.dl.validate(),
            Command::LaplaceCheck => self.laplace.validate(),
            Command::AgingCheck => self.aging.validate(),
            Command::LimitsCheck => self.limits.validate(),
            Command::SelfsimCheck => self.selfsim.validate(),
        }
    }

    /// The parameters that determine the outputs of `command`, with every
    /// default filled in. Worker count and output path are left out: they
    /// do not change results.
    pub fn effective(&self, command: Command) -> serde_json::Value {
        let section = match command {
            Command::Simulate => serde_json::to_value(&self.simulate),
            Command::RaceCheck => serde_json::to_value(&self.race),
            Command::EquilibriumCheck => serde_json::to_value(&self.equilibrium),
            Command::DlCheck => serde_json::to_value(&self.dl),
            Command::LaplaceCheck => serde_json::to_value(&self.laplace),
            Command::AgingCheck => serde_json::to_value(&self.aging),
            Command::LimitsCheck => serde_json::to_value(&self.limits),
            Command::SelfsimCheck => serde_json::to_value(&self.selfsim),
        }
        .expect("config sections serialize");
        serde_json::json!({ "seed": self.seed, "params": section })
    }
}

/// Best-effort field name for a serde error: the quoted identifier in
/// messages like "unknown field `x`".
fn json_field(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    msg.split('`').nth(1).map_or_else(|| "config".to_string(), str::to_string)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RaceConfig {
    pub sizes: Vec<f64>,
    /// Jump locations; `1, 2, ...` when absent.
    pub locations: Option<Vec<f64>>,
    pub ambient: f64,
    pub replicas: u64,
    pub ks_total_max: f64,
    pub ks_conditional_max: f64,
    pub sigmas: f64,
}

impl Default for RaceConfig {
    fn default() -> Self {
        Self {
            sizes: vec![2.0, 1.0, 0.5, 1.0, 2.0],
            locations: None,
            ambient: 1.0,
            replicas: 100_000,
            ks_total_max: 0.01,
            ks_conditional_max: 0.02,
            sigmas: 3.0,
        }
    }
}

impl RaceConfig {
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        let locs: Vec<f64> = match &self.locations {
            Some(l) => l.clone(),
            None => (1..=self.sizes.len()).map(|i| i as f64).collect(),
        };
        locs.into_iter().zip(self.sizes.iter().copied()).collect()
    }

    fn validate(&self) -> Result<(), ConfigError> {
        nonempty("race.sizes", &self.sizes)?;
        self.sizes.iter().try_for_each(|&s| positive("race.sizes", s))?;
        if let Some(l) = &self.locations {
            if l.len() != self.sizes.len() {
                return Err(ConfigError::new("race.locations", "one location per size is required"));
            }
            if l.windows(2).any(|w| !(w[0] < w[1])) || l.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                return Err(ConfigError::new("race.locations", "must be finite, nonnegative and increasing"));
            }
        }
        positive("race.ambient", self.ambient)?;
        at_least("race.replicas", self.replicas, 2)?;
        positive("race.ks_total_max", self.ks_total_max)?;
        positive("race.ks_conditional_max", self.ks_conditional_max)?;
        positive("race.sigmas", self.sigmas)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquilibriumConfig {
    #[serde(rename = "M")]
    pub m: Vec<usize>,
    pub alphas: Vec<f64>,
    pub env_seeds: u64,
    pub max_abs_diff: f64,
    /// Steps of the long direct run; zero skips it.
    pub steps: u64,
    pub batches: u64,
    pub sigmas: f64,
}

impl Default for EquilibriumConfig {
    fn default() -> Self {
        Self {
            m: vec![3, 3],
            alphas: vec![0.5, 0.3],
            env_seeds: 20,
            max_abs_diff: 1e-10,
            steps: 10_000_000,
            batches: 100,
            sigmas: 3.0,
        }
    }
}

impl EquilibriumConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        VolumeSpec::new(self.m.clone(), self.alphas.clone()).map_err(|e| from_core("equilibrium", e))?;
        if self.m.len() > 2 {
            return Err(ConfigError::new("equilibrium.M", "the closed form covers one or two levels"));
        }
        at_least("equilibrium.env_seeds", self.env_seeds, 1)?;
        positive("equilibrium.max_abs_diff", self.max_abs_diff)?;
        if self.steps > 0 {
            at_least("equilibrium.batches", self.batches, 2)?;
            at_least("equilibrium.steps", self.steps, self.batches)?;
        }
        positive("equilibrium.sigmas", self.sigmas)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(rename = "M")]
    pub m: Vec<usize>,
    pub alphas: Vec<f64>,
    /// Observation time of `Z`.
    pub t: f64,
    pub replicas: u64,
    pub ks_max: f64,
    /// Also write the first direct trajectory to `trajectory.csv`.
    pub trajectory: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            m: vec![3, 3],
            alphas: vec![0.5, 0.3],
            t: 5.0,
            replicas: 10_000,
            ks_max: 0.02,
            trajectory: true,
        }
    }
}

impl SimulateConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        VolumeSpec::new(self.m.clone(), self.alphas.clone()).map_err(|e| from_core("simulate", e))?;
        positive("simulate.t", self.t)?;
        at_least("simulate.replicas", self.replicas, 2)?;
        positive("simulate.ks_max", self.ks_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DlConfig {
    pub alphas: Vec<f64>,
    pub eps: f64,
    pub t: f64,
    pub replicas: u64,
    pub thetas: Vec<f64>,
    pub ks_max: f64,
    pub sigmas: f64,
    /// Replace the jumps below `eps` by their mean drift.
    pub compensate: bool,
}

impl Default for DlConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.3, 0.5, 0.7],
            eps: 1e-4,
            t: 1.0,
            replicas: 100_000,
            thetas: vec![0.5, 1.0, 2.0],
            ks_max: 0.02,
            sigmas: 3.0,
            compensate: true,
        }
    }
}

impl DlConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        nonempty("dl.alphas", &self.alphas)?;
        for &a in &self.alphas {
            StableSpec::new(a, self.eps).map_err(|e| from_core("dl", e))?;
        }
        positive("dl.t", self.t)?;
        at_least("dl.replicas", self.replicas, 2)?;
        thetas_ok("dl.thetas", &self.thetas)?;
        positive("dl.ks_max", self.ks_max)?;
        positive("dl.sigmas", self.sigmas)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaplaceConfig {
    pub alpha: f64,
    pub nu: f64,
    pub n: usize,
    pub env_seeds: u64,
    pub thetas: Vec<f64>,
    pub rel_tol: f64,
}

impl Default for LaplaceConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            nu: 0.5,
            n: 1_000_000,
            env_seeds: 5,
            thetas: vec![0.5, 1.0, 2.0, 4.0],
            rel_tol: 0.05,
        }
    }
}

impl LaplaceConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        VolumeSpec::new(vec![self.n], vec![self.alpha]).map_err(|e| from_core("laplace", e))?;
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(ConfigError::new("laplace.nu", format!("{} outside (0, 1)", self.nu)));
        }
        if self.n > trapcascade::bdtm::DENSE_LEAVES {
            return Err(ConfigError::new(
                "laplace.n",
                format!("{} exceeds {} depths", self.n, trapcascade::bdtm::DENSE_LEAVES),
            ));
        }
        at_least("laplace.env_seeds", self.env_seeds, 1)?;
        thetas_ok("laplace.thetas", &self.thetas)?;
        positive("laplace.rel_tol", self.rel_tol)
    }
}

/// Which family of trajectories an aging estimate runs on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProviderConfig {
    /// The finite trap model under a rescaling regime.
    Regime { alphas: Vec<f64>, regime: Regime },
    AgingProcess { alphas: Vec<f64>, eps: f64 },
    KProcess { alphas: Vec<f64>, eps: f64 },
}

impl ProviderConfig {
    pub fn alphas(&self) -> &[f64] {
        match self {
            ProviderConfig::Regime { alphas, .. }
            | ProviderConfig::AgingProcess { alphas, .. }
            | ProviderConfig::KProcess { alphas, .. } => alphas,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ProviderConfig::Regime { regime, .. } => match regime {
                Regime::Ergodic { .. } => "ergodic".into(),
                Regime::PolyAging { .. } => "poly_aging".into(),
                Regime::Order1 { .. } => "order1".into(),
            },
            ProviderConfig::AgingProcess { .. } => "aging_process".into(),
            ProviderConfig::KProcess { .. } => "k_process".into(),
        }
    }

    fn validate(&self, section: &str) -> Result<(), ConfigError> {
        match self {
            ProviderConfig::Regime { alphas, regime } => {
                let spec = RegimeSpec::new(alphas.clone(), regime.clone()).map_err(|e| from_core(section, e))?;
                VolumeSpec::new(spec.volumes(), alphas.clone()).map_err(|e| from_core(section, e))?;
                Ok(())
            }
            ProviderConfig::AgingProcess { alphas, eps } | ProviderConfig::KProcess { alphas, eps } => {
                nonempty(&format!("{section}.alphas"), alphas)?;
                for &a in alphas {
                    StableSpec::new(a, *eps).map_err(|e| from_core(section, e))?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgingConfig {
    pub provider: ProviderConfig,
    pub level: usize,
    pub t_w: f64,
    /// Windows are `(t_w, theta * t_w)`.
    pub thetas: Vec<f64>,
    pub replicas: u64,
    pub estimator: EstimatorKind,
    pub abs_tol: f64,
    pub f_tol: f64,
    /// Cross-check the quadrature against this many Monte Carlo samples.
    pub mc_samples: Option<u64>,
    pub mc_tol: f64,
}

impl Default for AgingConfig {
    fn default() -> Self {
        Self {
            provider: ProviderConfig::Regime {
                alphas: vec![0.5],
                regime: Regime::Order1 {
                    m: 1000.0,
                    volumes: vec![2000],
                },
            },
            level: 1,
            t_w: 1.0,
            thetas: vec![0.5, 1.0, 3.0],
            replicas: 10_000,
            estimator: EstimatorKind::ExponentialFunctional,
            abs_tol: 0.02,
            f_tol: 1e-8,
            mc_samples: None,
            mc_tol: 1e-3,
        }
    }
}

impl AgingConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        self.provider.validate("aging.provider")?;
        let k = self.provider.alphas().len();
        if self.level == 0 || self.level > k {
            return Err(ConfigError::new("aging.level", format!("{} outside 1..={k}", self.level)));
        }
        positive("aging.t_w", self.t_w)?;
        thetas_ok("aging.thetas", &self.thetas)?;
        at_least("aging.replicas", self.replicas, 2)?;
        positive("aging.abs_tol", self.abs_tol)?;
        positive("aging.f_tol", self.f_tol)?;
        if let Some(n) = self.mc_samples {
            at_least("aging.mc_samples", n, 2)?;
        }
        positive("aging.mc_tol", self.mc_tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsConfig {
    pub alphas: Vec<f64>,
    pub ns: Vec<u64>,
    pub t: f64,
    pub replicas: u64,
    /// Truncation of the limiting K-process.
    pub eps: f64,
    pub ks_max: f64,
    pub require_decreasing: bool,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.5],
            ns: vec![100, 1000, 10_000],
            t: 1.0,
            replicas: 10_000,
            eps: 1e-4,
            ks_max: 0.05,
            require_decreasing: true,
        }
    }
}

impl LimitsConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        nonempty("limits.ns", &self.ns)?;
        if self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::new("limits.ns", "must be increasing"));
        }
        for &n in &self.ns {
            let spec = RegimeSpec::new(self.alphas.clone(), Regime::Ergodic { n }).map_err(|e| from_core("limits", e))?;
            VolumeSpec::new(spec.volumes(), self.alphas.clone()).map_err(|e| from_core("limits", e))?;
        }
        for &a in &self.alphas {
            StableSpec::new(a, self.eps).map_err(|e| from_core("limits", e))?;
        }
        positive("limits.t", self.t)?;
        at_least("limits.replicas", self.replicas, 2)?;
        positive("limits.ks_max", self.ks_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelfsimConfig {
    pub alphas: Vec<f64>,
    pub eps: f64,
    pub level: usize,
    /// `Z(t)` is compared with `Z(c t) / c` for this `t` and `c`.
    pub t: f64,
    pub c: f64,
    pub replicas: u64,
    pub ks_max: f64,
    /// Scale factors for the estimator-level check at `(t_w, t_pi)`.
    pub cs: Vec<f64>,
    pub t_w: f64,
    pub t_pi: f64,
    pub estimator: EstimatorKind,
    pub sigmas: f64,
}

impl Default for SelfsimConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.5],
            eps: 1e-4,
            level: 1,
            t: 1.0,
            c: 2.0,
            replicas: 10_000,
            ks_max: 0.02,
            cs: vec![2.0, 5.0],
            t_w: 1.0,
            t_pi: 1.0,
            estimator: EstimatorKind::ExponentialFunctional,
            sigmas: 3.0,
        }
    }
}

impl SelfsimConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        nonempty("selfsim.alphas", &self.alphas)?;
        for &a in &self.alphas {
            StableSpec::new(a, self.eps).map_err(|e| from_core("selfsim", e))?;
        }
        if self.level == 0 || self.level > self.alphas.len() {
            return Err(ConfigError::new(
                "selfsim.level",
                format!("{} outside 1..={}", self.level, self.alphas.len()),
            ));
        }
        positive("selfsim.t", self.t)?;
        positive("selfsim.c", self.c)?;
        at_least("selfsim.replicas", self.replicas, 2)?;
        positive("selfsim.ks_max", self.ks_max)?;
        thetas_ok("selfsim.cs", &self.cs)?;
        positive("selfsim.t_w", self.t_w)?;
        positive("selfsim.t_pi", self.t_pi)?;
        positive("selfsim.sigmas", self.sigmas)
    }
}
