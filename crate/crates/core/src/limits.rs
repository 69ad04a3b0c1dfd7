//! Limiting dynamics and the rescaling regimes of the finite model.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::bdtm::{BdtmProvider, Environment, VolumeSpec};
use crate::cascade::{replica_stream, sample_scaled, CfjfProvider, FamilySampler, Trajectory, TrajectorySampler};
use crate::error::{invalid, Result};
use crate::jump_fn::{JumpFunction, JumpSource};
use crate::rng_heavy::{
    check_index, derive_seed, path_stream, poisson_count, sorted_uniform_points, stable_jump_set, PathKey,
    RandomStream, StableSpec,
};

const ATOM_TAG: u32 = 0x4b00_0000;
const REVISIT_TAG: u32 = 0x4b80_0000;
const AGING_TAG: u32 = 0xa900_0000;

fn specs(alphas: &[f64], eps: f64) -> Result<Vec<StableSpec>> {
    if alphas.is_empty() {
        return Err(invalid("alphas", "at least one level is required"));
    }
    alphas.iter().map(|&a| StableSpec::new(a, eps)).collect()
}

/// Width of the atom domain of a K-process level.
///
/// Under the unit-Laplace normalization, atoms on `[0, Gamma(1 - alpha))`
/// form a Poisson process with intensity `alpha * s^(-1 - alpha)`, the limit
/// of `n` Pareto depths divided by `n^(1/alpha)`.
pub fn k_atom_width(alpha: f64) -> f64 {
    gamma(1.0 - alpha)
}

/// Cascading K-process: every level-`j` function is a superposition of
/// unit-rate Poisson processes, one per subordinator atom, each point
/// carrying its atom's size.
#[derive(Debug, Clone)]
pub struct KProcessProvider {
    specs: Vec<StableSpec>,
    seed: u64,
}

pub fn k_process_provider(alphas: &[f64], eps: f64, seed: u64) -> Result<KProcessProvider> {
    Ok(KProcessProvider {
        specs: specs(alphas, eps)?,
        seed,
    })
}

impl KProcessProvider {
    /// Atom sizes for the level-`level` function under `parent`.
    pub fn atoms(&self, level: usize, parent: &[u64]) -> Result<Vec<f64>> {
        let spec = self.specs[level - 1];
        let width = k_atom_width(spec.alpha());
        let stream = path_stream(self.seed, &PathKey::new(parent, ATOM_TAG + level as u32));
        let set = stable_jump_set(spec, 0.0, width, &stream)?;
        Ok(set
            .generated()
            .iter()
            .take_while(|j| j.0 < width)
            .map(|j| j.1)
            .collect())
    }
}

struct Revisits {
    atoms: Arc<Vec<f64>>,
    width: f64,
    base: RandomStream,
}

impl JumpSource for Revisits {
    fn chunk_width(&self) -> f64 {
        self.width
    }

    fn chunk(&self, index: u64, out: &mut Vec<(f64, f64)>) {
        let mut s = self.base.fork(index);
        let n = poisson_count(self.atoms.len() as f64 * self.width, &mut s);
        let lo = index as f64 * self.width;
        let locs = sorted_uniform_points(n, lo, lo + self.width, &mut s);
        out.extend(locs.into_iter().map(|x| (x, self.atoms[s.index_below(self.atoms.len())])));
    }
}

impl CfjfProvider for KProcessProvider {
    fn levels(&self) -> usize {
        self.specs.len()
    }

    fn get(&self, level: usize, parent: &[u64]) -> Result<JumpFunction> {
        if level == 0 || level > self.levels() {
            return Err(invalid("level", format!("{level} outside 1..={}", self.levels())));
        }
        let atoms = self.atoms(level, parent)?;
        if atoms.is_empty() {
            return JumpFunction::from_jumps(Vec::new());
        }
        let width = 64.0 / atoms.len() as f64;
        let base = path_stream(self.seed, &PathKey::new(parent, REVISIT_TAG + level as u32));
        Ok(JumpFunction::lazy(Arc::new(Revisits {
            atoms: Arc::new(atoms),
            width,
            base,
        })))
    }
}

/// Cascading aging process: every level-`j` function is a truncated
/// `alpha_j`-stable subordinator path on `[0, infinity)`.
#[derive(Debug, Clone)]
pub struct AgingProcessProvider {
    specs: Vec<StableSpec>,
    seed: u64,
}

pub fn aging_process_provider(alphas: &[f64], eps: f64, seed: u64) -> Result<AgingProcessProvider> {
    Ok(AgingProcessProvider {
        specs: specs(alphas, eps)?,
        seed,
    })
}

impl CfjfProvider for AgingProcessProvider {
    fn levels(&self) -> usize {
        self.specs.len()
    }

    fn get(&self, level: usize, parent: &[u64]) -> Result<JumpFunction> {
        if level == 0 || level > self.levels() {
            return Err(invalid("level", format!("{level} outside 1..={}", self.levels())));
        }
        let stream = path_stream(self.seed, &PathKey::new(parent, AGING_TAG + level as u32));
        Ok(JumpFunction::lazy(Arc::new(crate::rng_heavy::StableCells::new(
            self.specs[level - 1],
            0.0,
            stream,
        ))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    Ergodic { n: u64 },
    PolyAging { n: u64, beta: f64 },
    Order1 { m: f64, volumes: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub alphas: Vec<f64>,
    pub regime: Regime,
}

/// `M_1 = n`, `M_j = ceil(n^(alpha_j / alpha_1))`.
pub fn fine_tuned_volumes(n: u64, alphas: &[f64]) -> Vec<usize> {
    let a1 = alphas[0];
    alphas
        .iter()
        .enumerate()
        .map(|(j, &a)| {
            if j == 0 {
                n as usize
            } else {
                let x = (n as f64).powf(a / a1);
                // absorb powf rounding on exact powers
                let r = x.round();
                if (x - r).abs() <= 1e-9 * x {
                    r as usize
                } else {
                    x.ceil() as usize
                }
            }
        })
        .collect()
}

/// `max_j |M_j^(1/alpha_j) - M_1^(1/alpha_1)| / M_1^(1/alpha_1)`.
pub fn fine_tuning_deviation(volumes: &[usize], alphas: &[f64]) -> f64 {
    let reference = (volumes[0] as f64).powf(1.0 / alphas[0]);
    volumes
        .iter()
        .zip(alphas)
        .map(|(&m, &a)| ((m as f64).powf(1.0 / a) - reference).abs() / reference)
        .fold(0.0, f64::max)
}

/// Worst-case deviation left by ceiling rounding: `M_j <= x_j + 1` with
/// `x_j = n^(alpha_j / alpha_1)`, so the deviation is at most
/// `(1 + 1/x_j)^(1/alpha_j) - 1`.
pub fn fine_tuning_bound(n: u64, alphas: &[f64]) -> f64 {
    let a1 = alphas[0];
    alphas
        .iter()
        .skip(1)
        .map(|&a| {
            let x = (n as f64).powf(a / a1);
            (1.0 + 1.0 / x).powf(1.0 / a) - 1.0
        })
        .fold(0.0, f64::max)
}

impl RegimeSpec {
    pub fn new(alphas: Vec<f64>, regime: Regime) -> Result<Self> {
        if alphas.is_empty() {
            return Err(invalid("alphas", "at least one level is required"));
        }
        for &a in &alphas {
            check_index(a)?;
        }
        match &regime {
            Regime::Ergodic { n } | Regime::PolyAging { n, .. } if *n == 0 => {
                return Err(invalid("n", "must be at least 1"));
            }
            Regime::PolyAging { beta, .. } if !(*beta > 0.0 && *beta < 1.0 / alphas[0]) => {
                return Err(invalid("beta", format!("{beta} outside (0, 1/alpha_1)")));
            }
            Regime::Order1 { m, volumes } => {
                if !(*m > 0.0 && m.is_finite()) {
                    return Err(invalid("m", format!("{m} must be positive")));
                }
                if volumes.len() != alphas.len() {
                    return Err(invalid("volumes", "one volume per level is required"));
                }
            }
            _ => {}
        }
        Ok(Self { alphas, regime })
    }

    pub fn levels(&self) -> usize {
        self.alphas.len()
    }

    /// Space-time factor: times and `z` values are divided by it.
    pub fn factor(&self) -> f64 {
        match &self.regime {
            Regime::Ergodic { n } => (*n as f64).powf(1.0 / self.alphas[0]),
            Regime::PolyAging { n, beta } => (*n as f64).powf(*beta),
            Regime::Order1 { m, .. } => *m,
        }
    }

    pub fn volumes(&self) -> Vec<usize> {
        match &self.regime {
            Regime::Ergodic { n } | Regime::PolyAging { n, .. } => fine_tuned_volumes(*n, &self.alphas),
            Regime::Order1 { volumes, .. } => volumes.clone(),
        }
    }

    /// Argument exponents `chi_j = alpha_j (1/alpha_1 - beta)`.
    pub fn chi(&self) -> Option<Vec<f64>> {
        match &self.regime {
            Regime::PolyAging { beta, .. } => {
                Some(self.alphas.iter().map(|a| a * (1.0 / self.alphas[0] - beta)).collect())
            }
            _ => None,
        }
    }

    /// Multipliers for the unit-spaced level-`j` jump locations. They place
    /// jumps on the natural argument scale of each regime and do not change
    /// the induced evolution.
    pub fn location_scales(&self) -> Vec<f64> {
        match &self.regime {
            Regime::Ergodic { .. } => vec![1.0; self.levels()],
            Regime::PolyAging { n, beta } => self.alphas.iter().map(|a| (*n as f64).powf(-a * beta)).collect(),
            Regime::Order1 { m, .. } => self.alphas.iter().map(|a| m.powf(-a)).collect(),
        }
    }

    pub fn is_annealed(&self) -> bool {
        matches!(self.regime, Regime::Ergodic { .. })
    }
}

const LABEL_SALT: u64 = 0x1abe1;

/// The finite-volume provider of a regime with its space-time factor.
pub fn rescaled_bdtm(spec: &RegimeSpec, seed: u64) -> Result<(BdtmProvider, f64)> {
    let env = Environment::new(VolumeSpec::new(spec.volumes(), spec.alphas.clone())?, seed);
    let provider = BdtmProvider::new(Arc::new(env), derive_seed(seed, LABEL_SALT)).with_location_scales(spec.location_scales())?;
    Ok((provider, spec.factor()))
}

/// Rescaled finite-volume trajectories. The ergodic regime redraws the
/// environment for every replica; the aging regimes keep one environment.
/// Jump destinations are redrawn for every replica in both cases.
pub struct RegimeSampler {
    spec: RegimeSpec,
    seed: u64,
    quenched: Option<Arc<Environment>>,
}

impl RegimeSampler {
    pub fn new(spec: RegimeSpec, seed: u64) -> Result<Self> {
        let volumes = VolumeSpec::new(spec.volumes(), spec.alphas.clone())?;
        let quenched = if spec.is_annealed() {
            None
        } else {
            Some(Arc::new(Environment::new(volumes, seed)))
        };
        Ok(Self { spec, seed, quenched })
    }

    pub fn spec(&self) -> &RegimeSpec {
        &self.spec
    }

    /// The provider of `replica`.
    pub fn provider(&self, replica: u64) -> Result<BdtmProvider> {
        match &self.quenched {
            Some(env) => BdtmProvider::new(env.clone(), derive_seed(derive_seed(self.seed, LABEL_SALT), replica))
                .with_location_scales(self.spec.location_scales()),
            None => Ok(rescaled_bdtm(&self.spec, derive_seed(self.seed, replica))?.0),
        }
    }
}

impl TrajectorySampler for RegimeSampler {
    fn levels(&self) -> usize {
        self.spec.levels()
    }

    fn sample(&self, replica: u64, horizon: f64) -> Result<Trajectory> {
        let mut stream = replica_stream(self.seed, replica);
        sample_scaled(&self.provider(replica)?, self.spec.factor(), horizon, &mut stream)
    }
}

/// Cascading K-process trajectories, atoms redrawn per replica.
pub fn k_process_sampler(alphas: &[f64], eps: f64, seed: u64) -> Result<impl TrajectorySampler> {
    let alphas = alphas.to_vec();
    let base = derive_seed(seed, ATOM_TAG as u64);
    FamilySampler::new(move |r| k_process_provider(&alphas, eps, derive_seed(base, r)), seed)
}

/// Cascading aging process trajectories, subordinators redrawn per replica.
pub fn aging_process_sampler(alphas: &[f64], eps: f64, seed: u64) -> Result<impl TrajectorySampler> {
    let alphas = alphas.to_vec();
    let base = derive_seed(seed, AGING_TAG as u64);
    FamilySampler::new(move |r| aging_process_provider(&alphas, eps, derive_seed(base, r)), seed)
}
