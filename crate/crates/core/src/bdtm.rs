//! The finite-volume k-level trap model on a tree.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::cascade::{replica_stream, CfjfProvider, FamilySampler, LevelSpan, Segment, Trajectory, TrajectorySampler, ZVector};
use crate::error::{invalid, Error, Result};
use crate::jump_fn::{JumpFunction, JumpSource};
use crate::rng_heavy::{check_index, derive_seed, pareto_unchecked, path_stream, PathKey, RandomStream};

/// Tag offset for the trap depths of level `j`.
const TAU_TAG: u32 = 0x7a00_0000;
/// Tag offset for the uniform labels of the provider.
const LABEL_TAG: u32 = 0x1a00_0000;
/// Environments with at most this many leaves keep their depths in memory.
pub const DENSE_LEAVES: usize = 1 << 20;
/// Size cap for the dense stationary solve.
pub const ORACLE_LEAVES: usize = 10_000;
/// Jumps per lazily generated provider chunk.
const LABEL_CHUNK: u64 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeSpec {
    #[serde(rename = "M")]
    pub m: Vec<usize>,
    pub alphas: Vec<f64>,
}

impl VolumeSpec {
    pub fn new(m: Vec<usize>, alphas: Vec<f64>) -> Result<Self> {
        if m.is_empty() {
            return Err(invalid("M", "at least one level is required"));
        }
        if m.len() != alphas.len() {
            return Err(invalid("alphas", format!("{} levels but {} alphas", m.len(), alphas.len())));
        }
        if let Some(bad) = m.iter().find(|&&v| v == 0) {
            return Err(invalid("M", format!("volume {bad} must be at least 1")));
        }
        for &a in &alphas {
            check_index(a)?;
        }
        Ok(Self { m, alphas })
    }

    pub fn levels(&self) -> usize {
        self.m.len()
    }

    /// Number of nodes in generation `j` (1-based), i.e. `M_1 * ... * M_j`.
    pub fn nodes(&self, j: usize) -> usize {
        self.m[..j].iter().fold(1usize, |acc, &v| acc.saturating_mul(v))
    }

    pub fn leaves(&self) -> usize {
        self.nodes(self.levels())
    }
}

/// A leaf `(x_1, ..., x_k)` with 1-based coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LeafState(pub SmallVec<[usize; 4]>);

impl LeafState {
    pub fn new(coords: &[usize]) -> Self {
        Self(coords.into())
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }
}

/// Trap depths on every node of the tree.
///
/// The depth at child `x` of parent `p` (1-based coordinates) is the
/// `(x - 1)`-th draw of the stream keyed by `(seed, p, level)`, so the dense
/// table and on-demand lookup agree exactly.
#[derive(Debug, Clone)]
pub struct Environment {
    spec: VolumeSpec,
    seed: u64,
    tables: Option<Arc<Vec<Vec<f64>>>>,
}

#[derive(Serialize, Deserialize)]
struct EnvironmentJson {
    seed: u64,
    #[serde(rename = "M")]
    m: Vec<usize>,
    alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<Vec<Vec<f64>>>,
}

fn tau_stream(seed: u64, parent: &[usize], level: usize) -> RandomStream {
    let key: Vec<u64> = parent.iter().map(|&x| x as u64).collect();
    path_stream(seed, &PathKey::new(key, TAU_TAG + level as u32))
}

/// Flat index of node `coords` within its generation.
fn flat(m: &[usize], coords: &[usize]) -> usize {
    coords.iter().zip(m).fold(0, |acc, (&x, &mi)| acc * mi + (x - 1))
}

/// Coordinates of flat index `idx` in generation `m.len()`.
fn unflat(m: &[usize], mut idx: usize) -> SmallVec<[usize; 4]> {
    let mut out: SmallVec<[usize; 4]> = SmallVec::from_elem(0, m.len());
    for (slot, &mi) in out.iter_mut().zip(m).rev() {
        *slot = idx % mi + 1;
        idx /= mi;
    }
    out
}

impl Environment {
    pub fn new(spec: VolumeSpec, seed: u64) -> Self {
        let mut env = Self {
            spec,
            seed,
            tables: None,
        };
        if env.spec.leaves() <= DENSE_LEAVES {
            env.tables = Some(Arc::new(env.generate_tables()));
        }
        env
    }

    /// An environment with explicit depth tables, one per level, each in
    /// parent-major order.
    pub fn from_tables(spec: VolumeSpec, tables: Vec<Vec<f64>>) -> Result<Self> {
        if tables.len() != spec.levels() {
            return Err(invalid("tau", "one table per level is required"));
        }
        for (j, t) in tables.iter().enumerate() {
            if t.len() != spec.nodes(j + 1) {
                return Err(invalid("tau", format!("level {} needs {} entries", j + 1, spec.nodes(j + 1))));
            }
            if let Some(bad) = t.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
                return Err(invalid("tau", format!("depth {bad} is not positive")));
            }
        }
        Ok(Self {
            spec,
            seed: 0,
            tables: Some(Arc::new(tables)),
        })
    }

    fn generate_tables(&self) -> Vec<Vec<f64>> {
        let m = &self.spec.m;
        (1..=self.spec.levels())
            .map(|j| {
                let alpha = self.spec.alphas[j - 1];
                let mut table = Vec::with_capacity(self.spec.nodes(j));
                for p in 0..self.spec.nodes(j - 1) {
                    let parent = unflat(&m[..j - 1], p);
                    let mut s = tau_stream(self.seed, &parent, j);
                    table.extend((0..m[j - 1]).map(|_| pareto_unchecked(alpha, s.uniform_open())));
                }
                table
            })
            .collect()
    }

    pub fn spec(&self) -> &VolumeSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn levels(&self) -> usize {
        self.spec.levels()
    }

    /// Depth at node `coords` of generation `coords.len()`.
    pub fn tau(&self, coords: &[usize]) -> f64 {
        let j = coords.len();
        debug_assert!(coords.iter().zip(&self.spec.m).all(|(&x, &mi)| x >= 1 && x <= mi));
        match &self.tables {
            Some(t) => t[j - 1][flat(&self.spec.m[..j], coords)],
            None => {
                let mut s = tau_stream(self.seed, &coords[..j - 1], j);
                s.seek_draw((coords[j - 1] - 1) as u64);
                pareto_unchecked(self.spec.alphas[j - 1], s.uniform_open())
            }
        }
    }

    pub fn lambda(&self, coords: &[usize]) -> f64 {
        1.0 / self.tau(coords)
    }

    /// Depths along the path to `leaf`, level 1 first.
    pub fn taus_along(&self, leaf: &LeafState) -> SmallVec<[f64; 4]> {
        (1..=self.levels()).map(|j| self.tau(&leaf.0[..j])).collect()
    }

    pub fn to_json(&self, explicit: bool) -> String {
        let raw = EnvironmentJson {
            seed: self.seed,
            m: self.spec.m.clone(),
            alphas: self.spec.alphas.clone(),
            tau: if explicit {
                Some(match &self.tables {
                    Some(t) => (**t).clone(),
                    None => self.generate_tables(),
                })
            } else {
                None
            },
        };
        serde_json::to_string(&raw).expect("environment serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: EnvironmentJson =
            serde_json::from_str(text).map_err(|e| invalid("environment", e.to_string()))?;
        let spec = VolumeSpec::new(raw.m, raw.alphas)?;
        match raw.tau {
            Some(t) => {
                let mut env = Self::from_tables(spec, t)?;
                env.seed = raw.seed;
                Ok(env)
            }
            None => Ok(Self::new(spec, raw.seed)),
        }
    }

    /// All leaves in lexicographic order.
    pub fn leaves(&self) -> impl Iterator<Item = LeafState> + '_ {
        (0..self.spec.leaves()).map(|i| LeafState(unflat(&self.spec.m, i)))
    }

    pub fn leaf_index(&self, leaf: &LeafState) -> usize {
        flat(&self.spec.m, &leaf.0)
    }

    pub fn uniform_leaf(&self, stream: &mut RandomStream) -> LeafState {
        LeafState(self.spec.m.iter().map(|&mi| stream.index_below(mi) + 1).collect())
    }
}

/// Outcome of one transition of the direct dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub holding: f64,
    /// Triggering level, 1-based.
    pub level: usize,
    pub next: LeafState,
}

/// One transition: wait for the first Poisson mark among the leaf and its
/// ancestors, then resample every coordinate from the triggering level down.
pub fn direct_step(env: &Environment, leaf: &LeafState, stream: &mut RandomStream) -> Step {
    let lambdas: SmallVec<[f64; 4]> = (1..=env.levels()).map(|j| env.lambda(&leaf.0[..j])).collect();
    step_with_rates(env, leaf, &lambdas, stream)
}

fn step_with_rates(env: &Environment, leaf: &LeafState, lambdas: &[f64], stream: &mut RandomStream) -> Step {
    let total: f64 = lambdas.iter().sum();
    let holding = stream.exp1() / total;
    let mut u = stream.uniform_open() * total;
    let mut level = lambdas.len();
    for (j, &l) in lambdas.iter().enumerate() {
        if u < l {
            level = j + 1;
            break;
        }
        u -= l;
    }
    let mut next = leaf.clone();
    for j in level..=lambdas.len() {
        next.0[j - 1] = stream.index_below(env.spec.m[j - 1]) + 1;
    }
    Step { holding, level, next }
}

/// Maximal runs of constant level-`j` labels, for every non-leaf level.
pub(crate) fn spans_from_labels(segments: &[Segment], levels: usize) -> Vec<LevelSpan> {
    let mut spans = Vec::new();
    for j in 1..levels {
        let mut start = 0;
        for i in 1..=segments.len() {
            if i == segments.len() || segments[i].z.label[j - 1] != segments[start].z.label[j - 1] {
                spans.push(LevelSpan {
                    level: j,
                    t_start: segments[start].t_start,
                    t_end: segments[i - 1].t_end,
                });
                start = i;
            }
        }
    }
    spans
}

/// Direct simulation on `[0, horizon]` from a uniform leaf. Labels are jump
/// counters, so a jump landing back on the same leaf still changes them.
pub fn simulate_direct(env: &Environment, horizon: f64, stream: &mut RandomStream) -> Result<Trajectory> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid("horizon", format!("{horizon} must be positive and finite")));
    }
    let k = env.levels();
    let mut leaf = env.uniform_leaf(stream);
    let mut counters: SmallVec<[u64; 4]> = SmallVec::from_elem(1, k);
    let mut t = 0.0;
    let mut segments = Vec::new();
    loop {
        let taus = env.taus_along(&leaf);
        let lambdas: SmallVec<[f64; 4]> = taus.iter().map(|t| 1.0 / t).collect();
        let step = step_with_rates(env, &leaf, &lambdas, stream);
        let state: SmallVec<[u64; 4]> = leaf.0.iter().map(|&x| x as u64).collect();
        let z = ZVector::new(&taus, &counters, &state);
        let end = t + step.holding;
        if end >= horizon {
            segments.push(Segment { t_start: t, t_end: horizon, z });
            break;
        }
        segments.push(Segment { t_start: t, t_end: end, z });
        for c in &mut counters[step.level - 1..] {
            *c += 1;
        }
        leaf = step.next;
        t = end;
    }
    let spans = spans_from_labels(&segments, k);
    Ok(Trajectory {
        segments,
        horizon,
        ambient: 0.0,
        spans,
    })
}

/// Direct trajectories on one environment, indexed by replica.
#[derive(Debug, Clone)]
pub struct DirectSampler {
    pub env: Arc<Environment>,
    pub seed: u64,
}

impl TrajectorySampler for DirectSampler {
    fn levels(&self) -> usize {
        self.env.levels()
    }

    fn sample(&self, replica: u64, horizon: f64) -> Result<Trajectory> {
        simulate_direct(&self.env, horizon, &mut replica_stream(self.seed, replica))
    }
}

/// Cascading-construction trajectories on one environment; jump
/// destinations are redrawn per replica.
pub fn cje_sampler(env: Arc<Environment>, seed: u64) -> Result<impl TrajectorySampler> {
    let labels = derive_seed(seed, LABEL_TAG as u64);
    FamilySampler::new(move |r| Ok(BdtmProvider::new(env.clone(), derive_seed(labels, r))), seed)
}

/// Long-run occupation time fractions per leaf (lexicographic order) with
/// batch-means standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occupation {
    pub fractions: Vec<f64>,
    pub stderr: Vec<f64>,
    pub steps: u64,
}

pub fn occupation_run(env: &Environment, steps: u64, batches: u64, stream: &mut RandomStream) -> Result<Occupation> {
    if batches < 2 || steps < batches {
        return Err(invalid("batches", format!("{batches} batches for {steps} steps")));
    }
    let n = env.spec.leaves();
    let lambdas: Vec<SmallVec<[f64; 4]>> = env
        .leaves()
        .map(|leaf| env.taus_along(&leaf).iter().map(|t| 1.0 / t).collect())
        .collect();
    let mut leaf = env.uniform_leaf(stream);
    let mut total = vec![0.0; n];
    let mut batch_fracs: Vec<Vec<f64>> = Vec::with_capacity(batches as usize);
    let per_batch = steps / batches;
    for b in 0..batches {
        let count = if b + 1 == batches { steps - per_batch * (batches - 1) } else { per_batch };
        let mut time = vec![0.0; n];
        for _ in 0..count {
            let idx = env.leaf_index(&leaf);
            let step = step_with_rates(env, &leaf, &lambdas[idx], stream);
            time[idx] += step.holding;
            leaf = step.next;
        }
        let sum: f64 = time.iter().sum();
        for (t, x) in total.iter_mut().zip(&time) {
            *t += x;
        }
        batch_fracs.push(time.iter().map(|x| x / sum).collect());
    }
    let grand: f64 = total.iter().sum();
    let fractions: Vec<f64> = total.iter().map(|x| x / grand).collect();
    let bf = batches as f64;
    let stderr = (0..n)
        .map(|i| {
            let mean = batch_fracs.iter().map(|f| f[i]).sum::<f64>() / bf;
            let var = batch_fracs.iter().map(|f| (f[i] - mean).powi(2)).sum::<f64>() / (bf - 1.0);
            (var / bf).sqrt()
        })
        .collect();
    Ok(Occupation { fractions, stderr, steps })
}

/// Probabilities over all leaves in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafWeights {
    pub m: Vec<usize>,
    pub weights: Vec<f64>,
}

impl LeafWeights {
    pub fn get(&self, leaf: &LeafState) -> f64 {
        self.weights[flat(&self.m, &leaf.0)]
    }

    pub fn max_abs_diff(&self, other: &LeafWeights) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Closed-form equilibrium for one or two levels.
pub fn equilibrium_weights(env: &Environment) -> Result<LeafWeights> {
    let m = env.spec.m.clone();
    let weights = match env.levels() {
        1 => {
            let taus: Vec<f64> = (1..=m[0]).map(|x| env.tau(&[x])).collect();
            let sum: f64 = taus.iter().sum();
            taus.iter().map(|t| t / sum).collect()
        }
        2 => {
            let t1: Vec<f64> = (1..=m[0]).map(|x| env.tau(&[x])).collect();
            let top: f64 = t1.iter().sum();
            let mut w = Vec::with_capacity(m[0] * m[1]);
            for x1 in 1..=m[0] {
                let inner: Vec<f64> = (1..=m[1])
                    .map(|x2| {
                        let t2 = env.tau(&[x1, x2]);
                        t2 / (t1[x1 - 1] + t2)
                    })
                    .collect();
                let norm: f64 = inner.iter().sum();
                w.extend(inner.iter().map(|v| t1[x1 - 1] / top * v / norm));
            }
            w
        }
        k => {
            return Err(Error::Unsupported(format!(
                "closed-form equilibrium is only available for one or two levels, not {k}"
            )))
        }
    };
    Ok(LeafWeights { m, weights })
}

/// Stationary law from a dense solve of the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stationary {
    pub weights: LeafWeights,
    /// `max |(pi Q)_y|`.
    pub residual: f64,
    /// Row-sum norm of `Q`.
    pub q_norm: f64,
}

/// Generator matrix of the direct dynamics over all leaves.
pub fn generator(env: &Environment) -> Result<DMatrix<f64>> {
    let n = env.spec.leaves();
    if n > ORACLE_LEAVES {
        return Err(Error::TooLarge { states: n, limit: ORACLE_LEAVES });
    }
    let m = &env.spec.m;
    let k = m.len();
    let mut q = DMatrix::<f64>::zeros(n, n);
    for (i, leaf) in env.leaves().enumerate() {
        for level in 1..=k {
            let rate = env.lambda(&leaf.0[..level]);
            let block: usize = m[level - 1..].iter().product();
            // targets agree with the leaf on coordinates before `level`
            let prefix = flat(&m[..level - 1], &leaf.0[..level - 1]);
            let each = rate / block as f64;
            for y in prefix * block..(prefix + 1) * block {
                q[(i, y)] += each;
            }
        }
    }
    for i in 0..n {
        q[(i, i)] = 0.0;
        let out: f64 = q.row(i).sum();
        q[(i, i)] = -out;
    }
    Ok(q)
}

pub fn stationary_oracle(env: &Environment) -> Result<Stationary> {
    let q = generator(env)?;
    let n = q.nrows();
    let mut a = q.transpose();
    for c in 0..n {
        a[(n - 1, c)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Unsupported("singular generator".into()))?;
    let residual = (pi.transpose() * &q).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let q_norm = (0..n).map(|i| q.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    Ok(Stationary {
        weights: LeafWeights {
            m: env.spec.m.clone(),
            weights: pi.iter().copied().collect(),
        },
        residual,
        q_norm,
    })
}

/// The trap model as a cascading family: level-`j` jumps sit at `1, 2, 3, ...`
/// (times a per-level location scale) with sizes `tau` at iid uniform labels.
#[derive(Debug, Clone)]
pub struct BdtmProvider {
    env: Arc<Environment>,
    label_seed: u64,
    location_scales: Vec<f64>,
}

impl BdtmProvider {
    pub fn new(env: Arc<Environment>, label_seed: u64) -> Self {
        let k = env.levels();
        Self {
            env,
            label_seed,
            location_scales: vec![1.0; k],
        }
    }

    /// Multiplies level-`j` jump locations by `scales[j - 1]`; the induced
    /// evolution is unchanged.
    pub fn with_location_scales(mut self, scales: Vec<f64>) -> Result<Self> {
        if scales.len() != self.env.levels() || scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(invalid("location_scales", "one positive scale per level"));
        }
        self.location_scales = scales;
        Ok(self)
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    fn label_stream(&self, level: usize, parent: &[u64]) -> RandomStream {
        path_stream(self.label_seed, &PathKey::new(parent, LABEL_TAG + level as u32))
    }

    /// Coordinate reached by jump `ordinal` of the level-`level` function
    /// under `parent`.
    pub fn label(&self, level: usize, parent: &[u64], ordinal: u64) -> usize {
        let mut s = self.label_stream(level, parent);
        s.seek_draw(ordinal);
        s.index_below(self.env.spec.m[level - 1]) + 1
    }

    /// Tree coordinates of the node reached through the ordinal path.
    pub fn coordinates(&self, path: &[u64]) -> SmallVec<[usize; 4]> {
        (0..path.len()).map(|i| self.label(i + 1, &path[..i], path[i])).collect()
    }
}

struct BdtmLevel {
    env: Arc<Environment>,
    level: usize,
    parent: SmallVec<[usize; 4]>,
    labels: RandomStream,
    scale: f64,
}

impl JumpSource for BdtmLevel {
    fn chunk_width(&self) -> f64 {
        LABEL_CHUNK as f64 * self.scale
    }

    fn chunk(&self, index: u64, out: &mut Vec<(f64, f64)>) {
        let mut s = self.labels.clone();
        s.seek_draw(index * LABEL_CHUNK);
        let mi = self.env.spec.m[self.level - 1];
        let mut coords = self.parent.clone();
        coords.push(0);
        for i in 0..LABEL_CHUNK {
            coords[self.level - 1] = s.index_below(mi) + 1;
            let loc = (index * LABEL_CHUNK + i + 1) as f64 * self.scale;
            out.push((loc, self.env.tau(&coords)));
        }
    }
}

impl CfjfProvider for BdtmProvider {
    fn levels(&self) -> usize {
        self.env.levels()
    }

    fn get(&self, level: usize, parent: &[u64]) -> Result<JumpFunction> {
        if level == 0 || level > self.levels() || parent.len() != level - 1 {
            return Err(invalid("level", format!("level {level} with parent of length {}", parent.len())));
        }
        let source = BdtmLevel {
            env: self.env.clone(),
            level,
            parent: self.coordinates(parent),
            labels: self.label_stream(level, parent),
            scale: self.location_scales[level - 1],
        };
        Ok(JumpFunction::lazy(Arc::new(source)))
    }

    fn state_id(&self, level: usize, parent: &[u64], ordinal: u64, _gamma: f64) -> u64 {
        self.label(level, parent, ordinal) as u64
    }
}
