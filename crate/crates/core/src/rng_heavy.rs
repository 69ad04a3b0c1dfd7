//! Reproducible randomness keyed by tree paths.
//!
//! Every random object in the crate is drawn from a [`RandomStream`] derived
//! from a master seed and a [`PathKey`]. Streams are ChaCha8 instances whose
//! key is a hash of `(seed, path, tag)`, so any node of an unbounded tree can
//! be sampled on demand without storing the environment, and sampling one
//! node never perturbs another.

use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Result};
use crate::jump_fn::{JumpFunction, JumpSource};

/// Identifies a node of the tree (sequence of child indices, empty for the
/// root) together with a tag that separates independent families living on
/// the same node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathKey {
    pub level_indices: Vec<u64>,
    pub context_tag: u32,
}

impl PathKey {
    pub fn new(level_indices: impl Into<Vec<u64>>, context_tag: u32) -> Self {
        Self {
            level_indices: level_indices.into(),
            context_tag,
        }
    }

    pub fn root(context_tag: u32) -> Self {
        Self::new(Vec::new(), context_tag)
    }

    pub fn child(&self, index: u64) -> Self {
        let mut level_indices = self.level_indices.clone();
        level_indices.push(index);
        Self {
            level_indices,
            context_tag: self.context_tag,
        }
    }

    pub fn with_tag(&self, context_tag: u32) -> Self {
        Self {
            level_indices: self.level_indices.clone(),
            context_tag,
        }
    }

    pub fn depth(&self) -> usize {
        self.level_indices.len()
    }
}

/// SplitMix64 finalizer.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash of `(seed, indices, tag)`; the length is folded in so that prefixes
/// never collide with their extensions.
pub(crate) fn hash_path(seed: u64, indices: &[u64], tag: u32) -> u64 {
    let mut h = mix64(seed ^ 0x5851_f42d_4c95_7f2d);
    h = mix64(h ^ u64::from(tag));
    h = mix64(h ^ indices.len() as u64);
    for &i in indices {
        h = mix64(h ^ i);
    }
    h
}

/// Combines two 64-bit values into one seed (used for replica seeds).
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    mix64(mix64(seed) ^ salt.rotate_left(17) ^ 0x2545_f491_4f6c_dd1d)
}

fn chacha_from(material: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut s = material;
    for chunk in key.chunks_exact_mut(8) {
        s = mix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// A deterministic pseudo-random stream.
///
/// Streams are plain values: clone one to replay it, send it to another
/// thread, or [`fork`](Self::fork) it into independent children.
#[derive(Clone, Debug)]
pub struct RandomStream {
    rng: ChaCha8Rng,
    material: u64,
}

/// The stream for `key` under `master_seed`.
pub fn path_stream(master_seed: u64, key: &PathKey) -> RandomStream {
    RandomStream::from_material(hash_path(master_seed, &key.level_indices, key.context_tag))
}

impl RandomStream {
    pub fn from_material(material: u64) -> Self {
        Self {
            rng: chacha_from(material),
            material,
        }
    }

    pub fn from_seed(seed: u64) -> Self {
        path_stream(seed, &PathKey::root(0))
    }

    /// Child stream `index`, independent of the parent's current position.
    pub fn fork(&self, index: u64) -> Self {
        Self::from_material(mix64(self.material ^ mix64(index.wrapping_add(0xa076_1d64_78bd_642f))))
    }

    /// Positions the stream at its `index`-th 64-bit draw.
    pub fn seek_draw(&mut self, index: u64) {
        self.rng.set_word_pos(u128::from(index) * 2);
    }

    /// Uniform in the open interval (0, 1); consumes exactly one 64-bit draw.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n`; consumes exactly one 64-bit draw.
    #[inline]
    pub fn index_below(&mut self, n: usize) -> usize {
        ((u128::from(self.rng.next_u64()) * n as u128) >> 64) as usize
    }

    /// Standard exponential variate.
    #[inline]
    pub fn exp1(&mut self) -> f64 {
        self.rng.sample(rand_distr::Exp1)
    }
}

impl RngCore for RandomStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Exact Pareto tail `P(tau > t) = t^-alpha`, `t >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailLaw {
    alpha: f64,
}

impl TailLaw {
    pub fn new(alpha: f64) -> Result<Self> {
        check_index(alpha)?;
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `P(tau > t)`.
    pub fn tail(&self, t: f64) -> f64 {
        if t <= 1.0 {
            1.0
        } else {
            t.powf(-self.alpha)
        }
    }
}

pub(crate) fn check_index(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid("alpha", format!("{alpha} is not in (0, 1)")))
    }
}

/// Inverse-CDF trap depth: `u^(-1/alpha)`.
pub fn pareto_sample(law: TailLaw, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(invalid("u", format!("{u} is not in (0, 1)")));
    }
    Ok(pareto_unchecked(law.alpha, u))
}

#[inline]
pub(crate) fn pareto_unchecked(alpha: f64, u: f64) -> f64 {
    u.powf(-1.0 / alpha)
}

/// Truncated alpha-stable subordinator, Lévy density
/// `alpha / Gamma(1 - alpha) * s^(-1 - alpha)` restricted to `s > epsilon`.
/// The untruncated Laplace exponent is `theta^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableSpec {
    alpha: f64,
    epsilon: f64,
}

impl StableSpec {
    pub fn new(alpha: f64, epsilon: f64) -> Result<Self> {
        check_index(alpha)?;
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("{epsilon} is not positive")));
        }
        Ok(Self { alpha, epsilon })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Mean number of retained jumps per unit of domain length.
    pub fn jump_rate(&self) -> f64 {
        self.epsilon.powf(-self.alpha) / gamma(1.0 - self.alpha)
    }

    /// Mean mass of the discarded jumps (`s <= epsilon`) per unit length.
    pub fn dropped_mass_rate(&self) -> f64 {
        let a = self.alpha;
        a * self.epsilon.powf(1.0 - a) / ((1.0 - a) * gamma(1.0 - a))
    }

    /// Jump size from a uniform variate: `epsilon * u^(-1/alpha)`.
    #[inline]
    pub fn size_from_uniform(&self, u: f64) -> f64 {
        self.epsilon * u.powf(-1.0 / self.alpha)
    }
}

/// `n` uniform points in `[lo, hi)`, sorted and pairwise distinct (ties are
/// re-drawn).
pub(crate) fn sorted_uniform_points(n: usize, lo: f64, hi: f64, stream: &mut RandomStream) -> Vec<f64> {
    let width = hi - lo;
    let mut pts: Vec<f64> = (0..n)
        .map(|_| lo + width * stream.uniform_open())
        .collect();
    loop {
        pts.sort_by(f64::total_cmp);
        let mut clash = false;
        for i in 1..pts.len() {
            if pts[i] <= pts[i - 1] {
                pts[i] = lo + width * stream.uniform_open();
                clash = true;
            }
        }
        if !clash {
            return pts;
        }
    }
}

/// Poisson count with the given mean; zero mean gives zero.
pub(crate) fn poisson_count(mean: f64, stream: &mut RandomStream) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("finite positive Poisson mean");
    let k: f64 = dist.sample(stream);
    k as usize
}

/// Unit cells of a Poisson random measure with the [`StableSpec`] intensity.
/// Cell `i` covers `[origin + i, origin + i + 1)` and is drawn from
/// `stream.fork(i)`, so extending the domain never changes existing cells.
#[derive(Debug, Clone)]
pub struct StableCells {
    spec: StableSpec,
    origin: f64,
    base: RandomStream,
}

impl StableCells {
    pub fn new(spec: StableSpec, origin: f64, base: RandomStream) -> Self {
        Self { spec, origin, base }
    }
}

impl JumpSource for StableCells {
    fn origin(&self) -> f64 {
        self.origin
    }

    fn chunk_width(&self) -> f64 {
        1.0
    }

    fn chunk(&self, index: u64, out: &mut Vec<(f64, f64)>) {
        let mut s = self.base.fork(index);
        let n = poisson_count(self.spec.jump_rate(), &mut s);
        let lo = self.origin + index as f64;
        let locs = sorted_uniform_points(n, lo, lo + 1.0, &mut s);
        out.extend(
            locs.into_iter()
                .map(|x| (x, self.spec.size_from_uniform(s.uniform_open()))),
        );
    }
}

/// Jumps of the truncated subordinator on `[a, b)`, lazily extendable past
/// `b` in unit cells anchored at `a`.
pub fn stable_jump_set(spec: StableSpec, a: f64, b: f64, stream: &RandomStream) -> Result<JumpFunction> {
    if !(a < b) || !a.is_finite() || a < 0.0 {
        return Err(invalid("domain", format!("[{a}, {b}) is not a valid interval")));
    }
    let mut f = JumpFunction::lazy(Arc::new(StableCells::new(spec, a, stream.clone())));
    f.extend_cover(b)?;
    Ok(f)
}

/// Jumps of the truncated subordinator on exactly `[a, a + cells)`, not
/// extendable.
pub fn stable_jump_set_fixed(spec: StableSpec, a: f64, cells: u64, stream: &RandomStream) -> JumpFunction {
    let cellsrc = StableCells::new(spec, a, stream.clone());
    let mut jumps = Vec::new();
    for i in 0..cells {
        cellsrc.chunk(i, &mut jumps);
    }
    JumpFunction::truncated(jumps, a + cells as f64).expect("cells produce sorted positive jumps")
}

/// Beta(a, b) variate as `X / (X + Y)` with independent Gamma variates.
pub fn beta_sample(a: f64, b: f64, stream: &mut RandomStream) -> Result<f64> {
    if !(a > 0.0) {
        return Err(invalid("a", format!("{a} is not positive")));
    }
    if !(b > 0.0) {
        return Err(invalid("b", format!("{b} is not positive")));
    }
    let ga = Gamma::new(a, 1.0).map_err(|e| invalid("a", e.to_string()))?;
    let gb = Gamma::new(b, 1.0).map_err(|e| invalid("b", e.to_string()))?;
    loop {
        let x: f64 = ga.sample(stream);
        let y: f64 = gb.sample(stream);
        let s = x + y;
        if s > 0.0 {
            let v = x / s;
            if v > 0.0 && v < 1.0 {
                return Ok(v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aging::ks_distance;

    #[test]
    fn same_key_same_stream() {
        let key = PathKey::new(vec![1, 2], 0);
        let mut a = path_stream(7, &key);
        let mut b = path_stream(7, &key);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn key_order_and_seed_matter() {
        let mut a = path_stream(7, &PathKey::new(vec![1, 2], 0));
        let mut b = path_stream(7, &PathKey::new(vec![2, 1], 0));
        assert_ne!(a.next_u64(), b.next_u64());
        let mut c = path_stream(7, &PathKey::root(0));
        let mut d = path_stream(8, &PathKey::root(0));
        assert_ne!(c.next_u64(), d.next_u64());
        let mut e = path_stream(7, &PathKey::root(1));
        assert_ne!(path_stream(7, &PathKey::root(0)).next_u64(), e.next_u64());
    }

    #[test]
    fn no_first_draw_collisions_over_random_keys() {
        let mut meta = RandomStream::from_seed(99);
        let mut seen = std::collections::HashSet::new();
        let mut keys = std::collections::HashSet::new();
        for _ in 0..10_000 {
            let depth = 1 + meta.index_below(4);
            let idx: Vec<u64> = (0..depth).map(|_| meta.index_below(50) as u64).collect();
            let key = PathKey::new(idx, meta.index_below(3) as u32);
            if keys.insert(key.clone()) {
                assert!(seen.insert(path_stream(7, &key).next_u64()), "collision at {key:?}");
            }
        }
    }

    #[test]
    fn seek_matches_sequential() {
        let mut a = RandomStream::from_seed(3);
        let draws: Vec<u64> = (0..40).map(|_| a.next_u64()).collect();
        for i in [0u64, 1, 7, 31, 39] {
            let mut b = RandomStream::from_seed(3);
            b.seek_draw(i);
            assert_eq!(b.next_u64(), draws[i as usize]);
        }
    }

    #[test]
    fn pareto_examples() {
        let law = TailLaw::new(0.5).unwrap();
        assert_eq!(pareto_sample(law, 0.25).unwrap(), 16.0);
        let near_one = pareto_sample(law, 1.0 - 1e-12).unwrap();
        assert!(near_one >= 1.0 && near_one - 1.0 < 1e-10);
        assert!(pareto_sample(law, 0.0).is_err());
        assert!(pareto_sample(law, 1.0).is_err());
        assert!(TailLaw::new(1.0).is_err());
        assert!(TailLaw::new(0.0).is_err());
    }

    #[test]
    fn pareto_tail_frequencies() {
        let law = TailLaw::new(0.5).unwrap();
        let mut s = RandomStream::from_seed(11);
        let n = 1_000_000;
        let mut over = [0usize; 3];
        let ts = [2.0, 4.0, 8.0];
        for _ in 0..n {
            let tau = pareto_sample(law, s.uniform_open()).unwrap();
            assert!(tau >= 1.0);
            for (c, t) in over.iter_mut().zip(ts) {
                if tau > t {
                    *c += 1;
                }
            }
        }
        for (c, t) in over.iter().zip(ts) {
            let p = law.tail(t);
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let phat = *c as f64 / n as f64;
            assert!((phat - p).abs() < 3.0 * se, "t={t}: {phat} vs {p}");
        }
    }

    #[test]
    fn stable_spec_rates() {
        let spec = StableSpec::new(0.5, 0.01).unwrap();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((spec.jump_rate() - 10.0 / sqrt_pi).abs() < 1e-12);
        assert!((spec.dropped_mass_rate() - 0.1 / sqrt_pi).abs() < 1e-12);
        assert!(StableSpec::new(0.5, 0.0).is_err());
    }

    #[test]
    fn stable_sizes_exceed_epsilon_and_lazy_extension_is_stable() {
        let spec = StableSpec::new(0.5, 0.01).unwrap();
        let base = path_stream(5, &PathKey::root(9));
        let one = stable_jump_set(spec, 0.0, 1.0, &base).unwrap();
        let mut two = stable_jump_set(spec, 0.0, 1.0, &base).unwrap();
        two.extend_to(2.0).unwrap();
        let head: Vec<_> = two.generated().iter().filter(|j| j.0 < 1.0).copied().collect();
        assert_eq!(one.generated(), head.as_slice());
        assert!(two.generated().iter().all(|j| j.1 > 0.01));
        let again = stable_jump_set(spec, 0.0, 1.0, &base).unwrap();
        assert_eq!(one.generated(), again.generated());
    }

    #[test]
    fn stable_counts_are_poisson() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let spec = StableSpec::new(0.5, 0.01).unwrap();
        let mean = spec.jump_rate();
        let reps = 10_000;
        let mut hist = vec![0usize; 40];
        for r in 0..reps {
            let f = stable_jump_set_fixed(spec, 0.0, 1, &path_stream(1, &PathKey::new(vec![r], 0)));
            hist[f.generated().len().min(39)] += 1;
        }
        // pool bins so every expected count is at least 5
        let pmf = |k: usize| {
            (-(mean) + k as f64 * mean.ln() - statrs::function::gamma::ln_gamma(k as f64 + 1.0)).exp()
        };
        let mut bins: Vec<(f64, f64)> = Vec::new();
        let (mut e, mut o) = (0.0, 0.0);
        let mut cdf = 0.0;
        for (k, &count) in hist.iter().enumerate().take(39) {
            let p = pmf(k);
            cdf += p;
            e += p * reps as f64;
            o += count as f64;
            if e >= 5.0 {
                bins.push((o, e));
                e = 0.0;
                o = 0.0;
            }
        }
        e += (1.0 - cdf) * reps as f64;
        o += hist[39] as f64;
        bins.push((o, e));
        let chi2: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
        let df = (bins.len() - 1) as f64;
        let p = 1.0 - ChiSquared::new(df).unwrap().cdf(chi2);
        assert!(p > 0.001, "chi2={chi2} df={df} p={p}");
    }

    #[test]
    fn beta_moments_and_shapes() {
        let mut s = RandomStream::from_seed(21);
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let x = beta_sample(0.5, 0.5, &mut s).unwrap();
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!((mean - 0.5).abs() < 3.0 * (var / n as f64).sqrt());

        let u: Vec<f64> = (0..100_000).map(|_| beta_sample(1.0, 1.0, &mut s).unwrap()).collect();
        assert!(ks_distance(&u, |x| x).unwrap() < 0.01);
        let arc: Vec<f64> = (0..100_000).map(|_| beta_sample(0.5, 0.5, &mut s).unwrap()).collect();
        let d = ks_distance(&arc, |x| 2.0 / std::f64::consts::PI * x.sqrt().asin()).unwrap();
        assert!(d < 0.01, "{d}");
        assert!(beta_sample(0.0, 1.0, &mut s).is_err());
        assert!(beta_sample(1.0, -1.0, &mut s).is_err());
    }
}
