//! Cascading jump evolutions built level by level from a cascading family of
//! jump functions.

use std::io::{self, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{invalid, Error, Result};
use crate::jump_fn::JumpFunction;
use crate::race::{race_jump, stop_probability};
use crate::rng_heavy::{path_stream, PathKey, RandomStream};

/// Context tag for per-replica dynamics streams.
pub const DYNAMICS_TAG: u32 = 0x5eed_0001;

pub type LevelVec<T> = SmallVec<[T; 4]>;

/// A cascading family: one jump function per level and parent jump path.
///
/// `parent` holds the 0-based jump ordinals chosen at levels `1..level`.
/// `get` must be deterministic in its arguments.
pub trait CfjfProvider: Send + Sync {
    fn levels(&self) -> usize;

    fn get(&self, level: usize, parent: &[u64]) -> Result<JumpFunction>;

    /// Identity of the state reached through a jump, used to decide whether
    /// two times sit in the same state. Defaults to the bit pattern of the
    /// jump size, which is distinct across distinct traps almost surely.
    fn state_id(&self, _level: usize, _parent: &[u64], _ordinal: u64, gamma: f64) -> u64 {
        gamma.to_bits()
    }
}

impl<P: CfjfProvider + ?Sized> CfjfProvider for Arc<P> {
    fn levels(&self) -> usize {
        (**self).levels()
    }
    fn get(&self, level: usize, parent: &[u64]) -> Result<JumpFunction> {
        (**self).get(level, parent)
    }
    fn state_id(&self, level: usize, parent: &[u64], ordinal: u64, gamma: f64) -> u64 {
        (**self).state_id(level, parent, ordinal, gamma)
    }
}

/// The state vector on one leaf-level constancy interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZVector {
    pub gamma: LevelVec<f64>,
    pub lambda_cum: LevelVec<f64>,
    pub z: LevelVec<f64>,
    /// Per-level jump counters: coordinate `j` changes exactly when a jump of
    /// level `<= j` happens.
    pub label: LevelVec<u64>,
    /// Per-level state identities.
    pub state: LevelVec<u64>,
}

impl ZVector {
    pub fn new(gamma: &[f64], label: &[u64], state: &[u64]) -> Self {
        let mut acc = 0.0;
        let lambda_cum: LevelVec<f64> = gamma
            .iter()
            .map(|g| {
                acc += 1.0 / g;
                acc
            })
            .collect();
        let z = lambda_cum.iter().map(|l| 1.0 / l).collect();
        Self {
            gamma: gamma.into(),
            lambda_cum,
            z,
            label: label.into(),
            state: state.into(),
        }
    }

    pub fn levels(&self) -> usize {
        self.gamma.len()
    }

    /// Strict decrease of `z` across levels. A tie only passes when the
    /// deeper rate is below the float resolution of the cumulative rate.
    pub fn ordered(&self) -> bool {
        let positive = self.z.iter().all(|z| *z > 0.0 && z.is_finite());
        positive
            && (1..self.z.len()).all(|j| {
                let (prev, cur) = (self.z[j - 1], self.z[j]);
                cur < prev || (cur == prev && 1.0 / self.gamma[j] <= self.lambda_cum[j - 1] * f64::EPSILON)
            })
    }

    fn rescale(&mut self, factor: f64) {
        for g in &mut self.gamma {
            *g /= factor;
        }
        for l in &mut self.lambda_cum {
            *l *= factor;
        }
        for z in &mut self.z {
            *z /= factor;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub z: ZVector,
}

impl Segment {
    pub fn len(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// Constancy interval of a non-leaf level, recorded by the engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSpan {
    pub level: usize,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub segments: Vec<Segment>,
    pub horizon: f64,
    pub ambient: f64,
    pub spans: Vec<LevelSpan>,
}

/// Counts of broken structural invariants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub segments: usize,
    pub boundaries: usize,
    pub contiguity: usize,
    pub z_order: usize,
    pub suffix: usize,
    pub tiling: usize,
}

impl InvariantReport {
    pub fn violations(&self) -> usize {
        self.contiguity + self.z_order + self.suffix + self.tiling
    }

    pub fn merge(&mut self, other: &InvariantReport) {
        self.segments += other.segments;
        self.boundaries += other.boundaries;
        self.contiguity += other.contiguity;
        self.z_order += other.z_order;
        self.suffix += other.suffix;
        self.tiling += other.tiling;
    }
}

const TILING_TOL: f64 = 1e-9;

impl Trajectory {
    pub fn levels(&self) -> usize {
        self.segments.first().map_or(0, |s| s.z.levels())
    }

    fn index_at(&self, t: f64) -> usize {
        self.segments.partition_point(|s| s.t_start <= t) - 1
    }

    /// Index of the segment holding `t`, treating the horizon as part of the
    /// last segment.
    fn closed_index_at(&self, t: f64) -> usize {
        if t >= self.horizon {
            self.segments.len() - 1
        } else {
            self.index_at(t)
        }
    }

    pub fn value_at(&self, t: f64) -> Result<&ZVector> {
        if !(t >= 0.0 && t < self.horizon) {
            return Err(Error::OutOfHorizon { t, horizon: self.horizon });
        }
        Ok(&self.segments[self.index_at(t)].z)
    }

    fn window(&self, level: usize, t_w: f64, t: f64) -> Result<(usize, usize)> {
        if level == 0 || level > self.levels() {
            return Err(invalid("level", format!("{level} outside 1..={}", self.levels())));
        }
        if !(t_w >= 0.0 && t >= 0.0) {
            return Err(invalid("t_w", format!("window [{t_w}, {t_w}+{t}] has a negative end")));
        }
        if t_w + t > self.horizon || t_w >= self.horizon {
            return Err(Error::OutOfHorizon {
                t: t_w + t,
                horizon: self.horizon,
            });
        }
        Ok((self.index_at(t_w), self.closed_index_at(t_w + t)))
    }

    /// No jump of levels `<= level` during `[t_w, t_w + t]`.
    pub fn no_jump(&self, level: usize, t_w: f64, t: f64) -> Result<bool> {
        let (a, b) = self.window(level, t_w, t)?;
        Ok(self.segments[a].z.label[level - 1] == self.segments[b].z.label[level - 1])
    }

    /// The level-`<= level` state is the same at `t_w` and `t_w + t`.
    pub fn same_state(&self, level: usize, t_w: f64, t: f64) -> Result<bool> {
        let (a, b) = self.window(level, t_w, t)?;
        Ok(self.segments[a].z.state[..level] == self.segments[b].z.state[..level])
    }

    /// The maximum of `Z_level` over `[t_w, t_w + t]` exceeds its maximum over
    /// `[0, t_w]`.
    pub fn novel(&self, level: usize, t_w: f64, t: f64) -> Result<bool> {
        let (a, b) = self.window(level, t_w, t)?;
        let j = level - 1;
        let past = self.segments[..=a]
            .iter()
            .map(|s| s.z.z[j])
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(self.segments[a + 1..=b].iter().any(|s| s.z.z[j] > past))
    }

    /// Divides time and every `z` by `factor`.
    pub fn rescale(&mut self, factor: f64) {
        for s in &mut self.segments {
            s.t_start /= factor;
            s.t_end /= factor;
            s.z.rescale(factor);
        }
        for s in &mut self.spans {
            s.t_start /= factor;
            s.t_end /= factor;
        }
        self.horizon /= factor;
        self.ambient *= factor;
    }

    /// Pins the horizon to `horizon`, absorbing rounding from a rescale.
    pub(crate) fn pin_horizon(&mut self, horizon: f64) {
        debug_assert!((self.horizon - horizon).abs() <= 1e-9 * horizon.max(1.0));
        self.horizon = horizon;
        if let Some(last) = self.segments.last_mut() {
            last.t_end = horizon;
        }
        for s in &mut self.spans {
            s.t_end = s.t_end.min(horizon);
        }
    }

    pub fn check_invariants(&self) -> InvariantReport {
        let mut report = InvariantReport {
            segments: self.segments.len(),
            boundaries: self.segments.len().saturating_sub(1),
            ..Default::default()
        };
        let Some(first) = self.segments.first() else {
            report.contiguity += 1;
            return report;
        };
        if first.t_start != 0.0 || self.segments.last().unwrap().t_end != self.horizon {
            report.contiguity += 1;
        }
        for s in &self.segments {
            if !(s.t_end > s.t_start) {
                report.contiguity += 1;
            }
            if !s.z.ordered() {
                report.z_order += 1;
            }
        }
        for w in self.segments.windows(2) {
            if w[0].t_end != w[1].t_start {
                report.contiguity += 1;
            }
            if !is_suffix_change(&w[0].z.label, &w[1].z.label) {
                report.suffix += 1;
            }
        }
        report.tiling = self.tiling_violations();
        report
    }

    fn tiling_violations(&self) -> usize {
        let k = self.levels();
        let mut violations = 0;
        let mut by_level: Vec<Vec<(f64, f64)>> = vec![Vec::new(); k + 1];
        for s in &self.spans {
            if s.level >= 1 && s.level < k {
                by_level[s.level].push((s.t_start, s.t_end));
            } else {
                violations += 1;
            }
        }
        by_level[k] = self.segments.iter().map(|s| (s.t_start, s.t_end)).collect();
        for level in by_level.iter_mut() {
            level.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        let top: f64 = by_level[1].iter().map(|(a, b)| b - a).sum();
        if (top - self.horizon).abs() > TILING_TOL * self.horizon.max(1.0) {
            violations += 1;
        }
        for j in 1..k {
            let children = &by_level[j + 1];
            for &(a, b) in &by_level[j] {
                let lo = children.partition_point(|c| c.0 < a);
                let hi = children.partition_point(|c| c.0 < b);
                let sum: f64 = children[lo..hi].iter().map(|(s, e)| e - s).sum();
                let start_ok = children.get(lo).is_some_and(|c| c.0 == a);
                if !start_ok || (sum - (b - a)).abs() > TILING_TOL * (b - a).max(f64::MIN_POSITIVE) {
                    violations += 1;
                }
            }
        }
        violations
    }

    /// One row per leaf segment:
    /// `t_start,t_end,z_1..z_k,label_1..label_k`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let k = self.levels();
        let mut header = vec!["t_start".to_string(), "t_end".to_string()];
        header.extend((1..=k).map(|j| format!("z_{j}")));
        header.extend((1..=k).map(|j| format!("label_{j}")));
        writeln!(w, "{}", header.join(","))?;
        for s in &self.segments {
            write!(w, "{},{}", s.t_start, s.t_end)?;
            for z in &s.z.z {
                write!(w, ",{z}")?;
            }
            for l in &s.z.label {
                write!(w, ",{l}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// The coordinates that differ form a nonempty suffix.
pub fn is_suffix_change(a: &[u64], b: &[u64]) -> bool {
    match a.iter().zip(b).position(|(x, y)| x != y) {
        None => false,
        Some(first) => a[first..].iter().zip(&b[first..]).all(|(x, y)| x != y),
    }
}

enum LevelEnd {
    Finished(f64),
    Truncated,
}

struct Engine<'a, P: ?Sized> {
    provider: &'a P,
    levels: usize,
    stream: &'a mut RandomStream,
    horizon: f64,
    segments: Vec<Segment>,
    spans: Vec<LevelSpan>,
    counters: LevelVec<u64>,
    path: LevelVec<u64>,
    gammas: LevelVec<f64>,
    states: LevelVec<u64>,
}

impl<P: CfjfProvider + ?Sized> Engine<'_, P> {
    /// Runs the race at `level` (0-based) starting at time `t0`.
    fn run_level(&mut self, level: usize, ambient: f64, t0: f64) -> Result<LevelEnd> {
        let mut s = self.provider.get(level + 1, &self.path)?;
        let mut t = t0;
        for ordinal in 0u64.. {
            let (_, gamma) = race_jump(&mut s, ordinal as usize)?;
            let lambda = 1.0 / gamma;
            let state = self.provider.state_id(level + 1, &self.path, ordinal, gamma);
            self.counters[level] += 1;
            self.path.push(ordinal);
            self.gammas.push(gamma);
            self.states.push(state);
            let end = if level + 1 < self.levels {
                let start = t;
                match self.run_level(level + 1, ambient + lambda, t)? {
                    LevelEnd::Finished(end) => {
                        self.spans.push(LevelSpan { level: level + 1, t_start: start, t_end: end });
                        Some(end)
                    }
                    LevelEnd::Truncated => {
                        self.spans.push(LevelSpan {
                            level: level + 1,
                            t_start: start,
                            t_end: self.horizon,
                        });
                        None
                    }
                }
            } else {
                let end = t + self.stream.exp1() / (ambient + lambda);
                let z = ZVector::new(&self.gammas, &self.counters, &self.states);
                if end >= self.horizon {
                    self.segments.push(Segment { t_start: t, t_end: self.horizon, z });
                    None
                } else {
                    self.segments.push(Segment { t_start: t, t_end: end, z });
                    Some(end)
                }
            };
            self.path.pop();
            self.gammas.pop();
            self.states.pop();
            match end {
                None => return Ok(LevelEnd::Truncated),
                Some(end) => t = end,
            }
            if ambient > 0.0 && self.stream.uniform_open() < stop_probability(ambient, lambda) {
                return Ok(LevelEnd::Finished(t));
            }
        }
        unreachable!()
    }
}

fn run_engine<P: CfjfProvider + ?Sized>(
    provider: &P,
    ambient: f64,
    horizon: f64,
    stream: &mut RandomStream,
) -> Result<Trajectory> {
    let levels = provider.levels();
    if levels == 0 {
        return Err(invalid("levels", "provider has no levels"));
    }
    let mut engine = Engine {
        provider,
        levels,
        stream,
        horizon,
        segments: Vec::new(),
        spans: Vec::new(),
        counters: SmallVec::from_elem(0, levels),
        path: SmallVec::new(),
        gammas: SmallVec::new(),
        states: SmallVec::new(),
    };
    let end = match engine.run_level(0, ambient, 0.0)? {
        LevelEnd::Finished(t) => t,
        LevelEnd::Truncated => horizon,
    };
    Ok(Trajectory {
        segments: engine.segments,
        horizon: end,
        ambient,
        spans: engine.spans,
    })
}

/// CJE up to the exponential horizon of a level-1 race with ambient rate
/// `ambient`.
pub fn simulate_cje<P: CfjfProvider + ?Sized>(
    provider: &P,
    ambient: f64,
    stream: &mut RandomStream,
) -> Result<Trajectory> {
    if !(ambient > 0.0 && ambient.is_finite()) {
        return Err(invalid("ambient", format!("{ambient} must be positive")));
    }
    run_engine(provider, ambient, f64::INFINITY, stream)
}

/// Full-time CJE on `[0, horizon]`: level 1 never stops, deeper levels race
/// against the cumulative rate of the levels above.
pub fn simulate_cje_horizon<P: CfjfProvider + ?Sized>(
    provider: &P,
    horizon: f64,
    stream: &mut RandomStream,
) -> Result<Trajectory> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid("horizon", format!("{horizon} must be positive and finite")));
    }
    run_engine(provider, 0.0, horizon, stream)
}

/// Produces independent full-time trajectories indexed by replica.
pub trait TrajectorySampler: Sync {
    fn levels(&self) -> usize;
    fn sample(&self, replica: u64, horizon: f64) -> Result<Trajectory>;
}

/// Stream for the dynamics of one replica.
pub fn replica_stream(seed: u64, replica: u64) -> RandomStream {
    path_stream(seed, &PathKey::new([replica], DYNAMICS_TAG))
}

/// Full-time CJE over one fixed provider, with time and `z` divided by
/// `factor`. Replicas differ only in their races; the jump functions are
/// shared. Use [`FamilySampler`] when the family itself is random.
pub struct ProviderSampler<P> {
    pub provider: P,
    pub seed: u64,
    pub factor: f64,
}

impl<P> ProviderSampler<P> {
    pub fn new(provider: P, seed: u64) -> Self {
        Self {
            provider,
            seed,
            factor: 1.0,
        }
    }

    pub fn with_factor(mut self, factor: f64) -> Self {
        self.factor = factor;
        self
    }
}

pub(crate) fn sample_scaled<P: CfjfProvider + ?Sized>(
    provider: &P,
    factor: f64,
    horizon: f64,
    stream: &mut RandomStream,
) -> Result<Trajectory> {
    let mut traj = simulate_cje_horizon(provider, horizon * factor, stream)?;
    if factor != 1.0 {
        traj.rescale(factor);
        traj.pin_horizon(horizon);
    }
    Ok(traj)
}

impl<P: CfjfProvider> TrajectorySampler for ProviderSampler<P> {
    fn levels(&self) -> usize {
        self.provider.levels()
    }

    fn sample(&self, replica: u64, horizon: f64) -> Result<Trajectory> {
        let mut stream = replica_stream(self.seed, replica);
        sample_scaled(&self.provider, self.factor, horizon, &mut stream)
    }
}

/// Full-time CJE over a freshly drawn family per replica: `make(replica)`
/// returns that replica's provider.
pub struct FamilySampler<F> {
    make: F,
    levels: usize,
    pub seed: u64,
    pub factor: f64,
}

impl<F, P> FamilySampler<F>
where
    F: Fn(u64) -> Result<P> + Sync,
    P: CfjfProvider,
{
    pub fn new(make: F, seed: u64) -> Result<Self> {
        let levels = make(0)?.levels();
        Ok(Self {
            make,
            levels,
            seed,
            factor: 1.0,
        })
    }

    pub fn with_factor(mut self, factor: f64) -> Self {
        self.factor = factor;
        self
    }
}

impl<F, P> TrajectorySampler for FamilySampler<F>
where
    F: Fn(u64) -> Result<P> + Sync,
    P: CfjfProvider,
{
    fn levels(&self) -> usize {
        self.levels
    }

    fn sample(&self, replica: u64, horizon: f64) -> Result<Trajectory> {
        let provider = (self.make)(replica)?;
        let mut stream = replica_stream(self.seed, replica);
        sample_scaled(&provider, self.factor, horizon, &mut stream)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jump_fn::JumpSource;

    /// Jumps of one size at every positive integer location.
    pub(crate) struct Lattice {
        pub sizes: Vec<f64>,
    }

    #[test]
    fn z_order_ties_only_below_resolution() {
        let ok = ZVector::new(&[1e-4, 2.0], &[0, 0], &[0, 0]);
        assert!(ok.z[1] < ok.z[0] && ok.ordered());
        let tie = ZVector::new(&[1e-4, 1e13], &[0, 0], &[0, 0]);
        assert_eq!(tie.z[0], tie.z[1]);
        assert!(tie.ordered());
        let mut bad = ok.clone();
        bad.z[1] = bad.z[0];
        assert!(!bad.ordered());
        bad.z[1] = -1.0;
        assert!(!bad.ordered());
    }

    struct Unit(f64);

    impl JumpSource for Unit {
        fn chunk_width(&self) -> f64 {
            64.0
        }
        fn chunk(&self, index: u64, out: &mut Vec<(f64, f64)>) {
            out.extend((1..=64).map(|i| ((index * 64 + i) as f64, self.0)));
        }
    }

    impl CfjfProvider for Lattice {
        fn levels(&self) -> usize {
            self.sizes.len()
        }
        fn get(&self, level: usize, _parent: &[u64]) -> Result<JumpFunction> {
            Ok(JumpFunction::lazy(Arc::new(Unit(self.sizes[level - 1]))))
        }
    }

    #[test]
    fn suffix_change_rule() {
        assert!(is_suffix_change(&[1, 2], &[1, 3]));
        assert!(is_suffix_change(&[1, 2], &[2, 3]));
        assert!(!is_suffix_change(&[1, 2], &[2, 2]));
        assert!(!is_suffix_change(&[1, 2], &[1, 2]));
    }

    #[test]
    fn k1_unit_lattice_visits_geometric() {
        let p = Lattice { sizes: vec![1.0] };
        let n = 100_000;
        let mut total = 0usize;
        let mut sq = 0f64;
        for r in 0..n {
            let mut s = replica_stream(1, r);
            let traj = simulate_cje(&p, 1.0, &mut s).unwrap();
            assert!(traj.segments.iter().all(|s| s.z.z[0] == 1.0));
            total += traj.segments.len();
            sq += (traj.segments.len() as f64).powi(2);
        }
        let mean = total as f64 / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!((mean - 2.0).abs() < 3.0 * (var / n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn k2_structure() {
        let p = Lattice { sizes: vec![2.0, 0.5] };
        for r in 0..200 {
            let traj = simulate_cje(&p, 0.3, &mut replica_stream(2, r)).unwrap();
            assert_eq!(traj.check_invariants().violations(), 0);
            let full = simulate_cje_horizon(&p, 10.0, &mut replica_stream(3, r)).unwrap();
            assert_eq!(full.horizon, 10.0);
            assert_eq!(full.segments.last().unwrap().t_end, 10.0);
            assert_eq!(full.check_invariants().violations(), 0);
        }
    }

    #[test]
    fn full_time_interval_laws_use_cumulative_rates() {
        // rates 1/2, 2, 1: first level-j intervals are exponential(Lambda_j)
        let p = Lattice { sizes: vec![2.0, 0.5, 1.0] };
        let lambda_cum = [0.5, 2.5, 3.5];
        let n = 20_000;
        let mut sums = [0.0f64; 3];
        for r in 0..n {
            let traj = simulate_cje_horizon(&p, 60.0, &mut replica_stream(4, r)).unwrap();
            for (j, sum) in sums.iter_mut().enumerate().take(2) {
                let first = traj.spans.iter().find(|s| s.level == j + 1 && s.t_start == 0.0).unwrap();
                *sum += first.t_end - first.t_start;
            }
            sums[2] += traj.segments[0].len();
        }
        for (sum, rate) in sums.iter().zip(lambda_cum) {
            let mean = sum / n as f64;
            let se = 1.0 / rate / (n as f64).sqrt();
            assert!((mean - 1.0 / rate).abs() < 4.0 * se, "{mean} vs {}", 1.0 / rate);
        }
    }

    #[test]
    fn value_at_and_no_jump() {
        let z = |l: [u64; 2]| ZVector::new(&[2.0, 1.0], &l, &l);
        let traj = Trajectory {
            segments: vec![
                Segment { t_start: 0.0, t_end: 1.0, z: z([1, 1]) },
                Segment { t_start: 1.0, t_end: 2.0, z: z([1, 2]) },
            ],
            horizon: 2.0,
            ambient: 0.0,
            spans: vec![LevelSpan { level: 1, t_start: 0.0, t_end: 2.0 }],
        };
        assert_eq!(traj.value_at(1.0).unwrap().label[1], 2);
        assert_eq!(traj.value_at(0.5).unwrap().label[1], 1);
        assert!(traj.value_at(2.0).is_err());
        assert!(traj.no_jump(2, 0.5, 0.0).unwrap());
        assert!(traj.no_jump(2, 0.2, 0.5).unwrap());
        assert!(traj.no_jump(1, 0.5, 1.0).unwrap());
        assert!(!traj.no_jump(2, 0.5, 1.0).unwrap());
        assert!(traj.no_jump(1, 0.5, 2.0).is_err());
        assert_eq!(traj.check_invariants().violations(), 0);
        let mut out = Vec::new();
        traj.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t_start,t_end,z_1,z_2,label_1,label_2");
        assert_eq!(text.lines().nth(1).unwrap(), "0,1,2,0.6666666666666666,1,1");
    }
}
