//! Pure-jump nondecreasing functions and their exponential-marked clock parts.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::rng_heavy::RandomStream;

/// Stateless generator of jumps, chunk by chunk.
///
/// Chunk `i` holds the jumps with locations in
/// `[origin + i * width, origin + (i + 1) * width)`, sorted, strictly
/// increasing, with positive sizes. A chunk must always produce the same
/// jumps, which is what makes lazy extension reproducible.
pub trait JumpSource: Send + Sync {
    fn origin(&self) -> f64 {
        0.0
    }
    fn chunk_width(&self) -> f64;
    fn chunk(&self, index: u64, out: &mut Vec<(f64, f64)>);
}

/// Consecutive empty chunks tolerated before a lazy function reports that it
/// cannot reach a requested point.
const MAX_EMPTY_CHUNKS: u64 = 1 << 20;

/// A jump function `S(r) = sum of sizes at locations <= r`.
///
/// The generated prefix is stored explicitly; an optional [`JumpSource`]
/// extends it on demand. Extension mutates the prefix, so a lazily extended
/// function is single-writer.
#[derive(Clone)]
pub struct JumpFunction {
    jumps: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
    source: Option<Arc<dyn JumpSource>>,
    next_chunk: u64,
    generated_up_to: f64,
}

impl fmt::Debug for JumpFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JumpFunction")
            .field("jumps", &self.jumps.len())
            .field("generated_up_to", &self.generated_up_to)
            .field("extendable", &self.source.is_some())
            .finish()
    }
}

impl PartialEq for JumpFunction {
    fn eq(&self, other: &Self) -> bool {
        self.jumps == other.jumps && self.generated_up_to == other.generated_up_to
    }
}

fn validate(jumps: &[(f64, f64)]) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for &(loc, size) in jumps {
        if !(loc >= 0.0 && loc.is_finite()) {
            return Err(invalid("jumps", format!("location {loc} is not a finite nonnegative real")));
        }
        if !(size > 0.0 && size.is_finite()) {
            return Err(invalid("jumps", format!("size {size} at {loc} is not positive")));
        }
        if loc <= prev {
            return Err(invalid("jumps", format!("locations not strictly increasing at {loc}")));
        }
        prev = loc;
    }
    Ok(())
}

impl JumpFunction {
    /// A fully specified function with finitely many jumps.
    pub fn from_jumps(jumps: Vec<(f64, f64)>) -> Result<Self> {
        Self::truncated(jumps, f64::INFINITY)
    }

    /// A function known only on `[0, up_to)`.
    pub fn truncated(jumps: Vec<(f64, f64)>, up_to: f64) -> Result<Self> {
        validate(&jumps)?;
        if let Some(&(last, _)) = jumps.last() {
            if last >= up_to {
                return Err(invalid("up_to", format!("jump at {last} beyond domain {up_to}")));
            }
        }
        let cumulative = running_sum(&jumps);
        Ok(Self {
            jumps,
            cumulative,
            source: None,
            next_chunk: 0,
            generated_up_to: up_to,
        })
    }

    /// A lazily generated function; nothing is generated until queried.
    pub fn lazy(source: Arc<dyn JumpSource>) -> Self {
        let origin = source.origin();
        Self {
            jumps: Vec::new(),
            cumulative: Vec::new(),
            source: Some(source),
            next_chunk: 0,
            generated_up_to: origin,
        }
    }

    pub fn generated(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    pub fn generated_up_to(&self) -> f64 {
        self.generated_up_to
    }

    pub fn is_extendable(&self) -> bool {
        self.source.is_some()
    }

    /// Sum of the generated sizes.
    pub fn generated_mass(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Generates one more chunk. Returns `false` if not extendable.
    fn extend_once(&mut self) -> bool {
        let Some(source) = self.source.clone() else {
            return false;
        };
        let start = self.jumps.len();
        source.chunk(self.next_chunk, &mut self.jumps);
        debug_assert!(validate(&self.jumps[start.saturating_sub(1)..]).is_ok());
        let mut acc = self.generated_mass();
        for &(_, size) in &self.jumps[start..] {
            acc += size;
            self.cumulative.push(acc);
        }
        self.next_chunk += 1;
        self.generated_up_to = source.origin() + self.next_chunk as f64 * source.chunk_width();
        true
    }

    /// Extends until every jump at a location `<= r` is generated.
    pub fn extend_to(&mut self, r: f64) -> Result<()> {
        while self.generated_up_to <= r {
            if !self.extend_once() {
                return Err(Error::DomainExhausted {
                    at: r,
                    generated_up_to: self.generated_up_to,
                });
            }
        }
        Ok(())
    }

    /// Extends until the half-open domain `[origin, b)` is covered.
    pub fn extend_cover(&mut self, b: f64) -> Result<()> {
        while self.generated_up_to < b {
            if !self.extend_once() {
                return Err(Error::DomainExhausted {
                    at: b,
                    generated_up_to: self.generated_up_to,
                });
            }
        }
        Ok(())
    }

    /// Extends until at least one more jump exists beyond the current
    /// prefix, giving up after a long run of empty chunks.
    fn extend_for_more(&mut self) -> Result<()> {
        let before = self.jumps.len();
        let mut empty = 0;
        while self.jumps.len() == before {
            if !self.extend_once() || empty >= MAX_EMPTY_CHUNKS {
                return Err(Error::DomainExhausted {
                    at: self.generated_up_to,
                    generated_up_to: self.generated_up_to,
                });
            }
            empty += 1;
        }
        Ok(())
    }

    /// The `index`-th jump (0-based), generating as needed.
    pub fn jump(&mut self, index: usize) -> Result<(f64, f64)> {
        while self.jumps.len() <= index {
            self.extend_for_more()?;
        }
        Ok(self.jumps[index])
    }

    /// `S(r)`.
    pub fn evaluate(&mut self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(invalid("r", format!("{r} is negative")));
        }
        self.extend_to(r)?;
        let n = self.jumps.partition_point(|j| j.0 <= r);
        Ok(if n == 0 { 0.0 } else { self.cumulative[n - 1] })
    }

    /// Smallest jump location `r` with `S(r) > t`.
    pub fn right_inverse(&mut self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(invalid("t", format!("{t} is negative")));
        }
        while self.generated_mass() <= t {
            self.extend_for_more()?;
        }
        let i = self.cumulative.partition_point(|&c| c <= t);
        Ok(self.jumps[i].0)
    }

    /// First jump strictly after `r`.
    pub fn next_jump(&mut self, r: f64) -> Result<(f64, f64)> {
        loop {
            let i = self.jumps.partition_point(|j| j.0 <= r);
            if i < self.jumps.len() {
                return Ok(self.jumps[i]);
            }
            self.extend_for_more()?;
        }
    }

    /// Drops the lazy source, freezing the generated prefix.
    pub fn snapshot(&self) -> Self {
        Self {
            source: None,
            ..self.clone()
        }
    }
}

fn running_sum(jumps: &[(f64, f64)]) -> Vec<f64> {
    let mut acc = 0.0;
    jumps
        .iter()
        .map(|&(_, s)| {
            acc += s;
            acc
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct JumpFunctionJson {
    jumps: Vec<[f64; 2]>,
}

impl Serialize for JumpFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        JumpFunctionJson {
            jumps: self.jumps.iter().map(|&(l, s)| [l, s]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for JumpFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = JumpFunctionJson::deserialize(deserializer)?;
        JumpFunction::from_jumps(raw.jumps.into_iter().map(|[l, s]| (l, s)).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// A source with locations multiplied by `location_scale` and sizes by
/// `size_scale`.
pub struct Rescaled {
    inner: Arc<dyn JumpSource>,
    location_scale: f64,
    size_scale: f64,
}

impl Rescaled {
    pub fn new(inner: Arc<dyn JumpSource>, location_scale: f64, size_scale: f64) -> Self {
        Self {
            inner,
            location_scale,
            size_scale,
        }
    }
}

impl JumpSource for Rescaled {
    fn origin(&self) -> f64 {
        self.inner.origin() * self.location_scale
    }

    fn chunk_width(&self) -> f64 {
        self.inner.chunk_width() * self.location_scale
    }

    fn chunk(&self, index: u64, out: &mut Vec<(f64, f64)>) {
        let start = out.len();
        self.inner.chunk(index, out);
        for j in &mut out[start..] {
            j.0 *= self.location_scale;
            j.1 *= self.size_scale;
        }
    }
}

/// `K(r) = sum over jumps s <= r of gamma(s) * E(s)`.
#[derive(Debug, Clone)]
pub struct ClockPart {
    base: JumpFunction,
    marks: Vec<f64>,
    cumulative: Vec<f64>,
}

/// Marks every generated jump of `s` with an independent standard
/// exponential.
pub fn clock_part(s: &JumpFunction, stream: &mut RandomStream) -> ClockPart {
    let marks = s.generated().iter().map(|_| stream.exp1()).collect();
    ClockPart::with_marks(s, marks)
}

/// Clock part with every mark equal to one, so `K = S`.
pub fn clock_part_unit_marks(s: &JumpFunction) -> ClockPart {
    ClockPart::with_marks(s, vec![1.0; s.generated().len()])
}

impl ClockPart {
    fn with_marks(s: &JumpFunction, marks: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = s
            .generated()
            .iter()
            .zip(&marks)
            .map(|(&(_, g), &e)| {
                acc += g * e;
                acc
            })
            .collect();
        Self {
            base: s.snapshot(),
            marks,
            cumulative,
        }
    }

    pub fn base(&self) -> &JumpFunction {
        &self.base
    }

    pub fn marks(&self) -> &[f64] {
        &self.marks
    }

    /// Jumps of `K` as `(location, gamma * E)`.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.base
            .generated()
            .iter()
            .zip(&self.marks)
            .map(|(&(l, g), &e)| (l, g * e))
    }

    pub fn evaluate(&self, r: f64) -> f64 {
        let n = self.base.generated().partition_point(|j| j.0 <= r);
        if n == 0 {
            0.0
        } else {
            self.cumulative[n - 1]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aging::ks_distance;
    use crate::rng_heavy::{path_stream, stable_jump_set, PathKey, StableSpec};
    use proptest::prelude::*;

    fn two_jumps() -> JumpFunction {
        JumpFunction::from_jumps(vec![(1.0, 2.0), (2.5, 0.5)]).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let mut s = two_jumps();
        assert_eq!(s.evaluate(0.5).unwrap(), 0.0);
        assert_eq!(s.evaluate(1.0).unwrap(), 2.0);
        assert_eq!(s.evaluate(3.0).unwrap(), 2.5);
    }

    #[test]
    fn right_inverse_examples() {
        let mut s = two_jumps();
        assert_eq!(s.right_inverse(1.5).unwrap(), 1.0);
        assert_eq!(s.right_inverse(2.0).unwrap(), 2.5);
        assert!(matches!(s.right_inverse(2.5), Err(Error::DomainExhausted { .. })));
    }

    #[test]
    fn next_jump_examples() {
        let mut s = two_jumps();
        assert_eq!(s.next_jump(1.0).unwrap(), (2.5, 0.5));
        assert_eq!(s.next_jump(0.0).unwrap(), (1.0, 2.0));
        assert!(matches!(s.next_jump(2.5), Err(Error::DomainExhausted { .. })));
    }

    #[test]
    fn truncated_domain_is_enforced() {
        let mut s = JumpFunction::truncated(vec![(0.5, 1.0)], 1.0).unwrap();
        assert_eq!(s.evaluate(0.9).unwrap(), 1.0);
        assert!(matches!(s.evaluate(1.0), Err(Error::DomainExhausted { .. })));
    }

    #[test]
    fn rejects_bad_jumps() {
        assert!(JumpFunction::from_jumps(vec![(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(JumpFunction::from_jumps(vec![(1.0, 0.0)]).is_err());
        assert!(JumpFunction::from_jumps(vec![(-1.0, 1.0)]).is_err());
    }

    #[test]
    fn json_shape() {
        let s = two_jumps();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"jumps":[[1.0,2.0],[2.5,0.5]]}"#);
        let back: JumpFunction = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<JumpFunction>(r#"{"jumps":[[2.0,1.0],[1.0,1.0]]}"#).is_err());
    }

    #[test]
    fn lazy_function_is_unbounded() {
        let spec = StableSpec::new(0.5, 0.01).unwrap();
        let mut s = stable_jump_set(spec, 0.0, 1.0, &path_stream(4, &PathKey::root(0))).unwrap();
        let r = s.right_inverse(50.0).unwrap();
        assert!(s.evaluate(r).unwrap() > 50.0);
    }

    #[test]
    fn unit_marks_reproduce_s() {
        let spec = StableSpec::new(0.4, 0.01).unwrap();
        let mut s = stable_jump_set(spec, 0.0, 3.0, &path_stream(4, &PathKey::root(0))).unwrap();
        let k = clock_part_unit_marks(&s);
        for i in 0..30 {
            let r = i as f64 * 0.1;
            assert_eq!(k.evaluate(r), s.evaluate(r).unwrap());
        }
    }

    #[test]
    fn clock_part_shares_jump_locations_and_sums_terms() {
        let spec = StableSpec::new(0.6, 0.01).unwrap();
        let s = stable_jump_set(spec, 0.0, 2.0, &path_stream(8, &PathKey::root(0))).unwrap();
        let mut rng = RandomStream::from_seed(1);
        let k = clock_part(&s, &mut rng);
        let locs: Vec<f64> = k.jumps().map(|j| j.0).collect();
        let base: Vec<f64> = s.generated().iter().map(|j| j.0).collect();
        assert_eq!(locs, base);
        let mut acc = 0.0;
        for (i, ((l, g), e)) in s.generated().iter().zip(k.marks()).enumerate() {
            acc += g * e;
            assert!(g * e > 0.0);
            assert_eq!(k.evaluate(*l), acc, "jump {i}");
        }
    }

    #[test]
    fn single_jump_clock_is_exponential() {
        let s = JumpFunction::from_jumps(vec![(1.0, 3.0)]).unwrap();
        let mut rng = RandomStream::from_seed(2);
        let sizes: Vec<f64> = (0..100_000)
            .map(|_| clock_part(&s, &mut rng).jumps().next().unwrap().1)
            .collect();
        let d = ks_distance(&sizes, |x| 1.0 - (-x / 3.0).exp()).unwrap();
        assert!(d < 0.01, "{d}");
    }

    proptest! {
        #[test]
        fn evaluate_monotone_and_inverse_hits_jumps(
            raw in proptest::collection::vec((0.001f64..10.0, 0.01f64..5.0), 1..30),
            queries in proptest::collection::vec(0.0f64..12.0, 1..40),
        ) {
            let mut jumps = raw;
            jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
            jumps.dedup_by(|a, b| a.0 == b.0);
            let mut s = JumpFunction::from_jumps(jumps.clone()).unwrap();
            let mut qs = queries;
            qs.sort_by(f64::total_cmp);
            let mut prev = 0.0;
            for q in qs {
                let v = s.evaluate(q).unwrap();
                prop_assert!(v >= prev);
                prev = v;
            }
            for &(loc, _) in &jumps {
                let v = s.evaluate(loc).unwrap();
                let total = s.generated_mass();
                if v < total {
                    let r = s.right_inverse(v).unwrap();
                    prop_assert!(r >= loc);
                    prop_assert!(jumps.iter().any(|j| j.0 == r));
                }
                let before = s.evaluate(loc * (1.0 - 1e-12)).unwrap();
                prop_assert!(before < v);
            }
        }
    }
}
