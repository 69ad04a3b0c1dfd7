//! The exponential race over a jump function.
//!
//! Jumps are visited in increasing order. At a jump with rate `lambda = 1/gamma`
//! the sojourn is exponential with rate `ambient + lambda`, and the race stops
//! there with probability `ambient / (ambient + lambda)`. Per jump the stream
//! is consumed as: sojourn draw, then stop draw.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::jump_fn::{clock_part, JumpFunction};
use crate::rng_heavy::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub location: f64,
    pub rate: f64,
    pub sojourn: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaceOutcome {
    /// Every visited jump in order; the last one is the stopping jump and
    /// its `sojourn` is the undershoot.
    pub visited: Vec<Visit>,
    /// Ordinal of the stopping jump within the jump function.
    pub stop_index: usize,
    pub stop_location: f64,
    pub undershoot: f64,
    pub overshoot: f64,
    pub total_time: f64,
}

impl RaceOutcome {
    pub fn stop_rate(&self) -> f64 {
        self.visited[self.stop_index].rate
    }
}

/// Probability of stopping at a jump of rate `lambda`.
#[inline]
pub fn stop_probability(ambient: f64, lambda: f64) -> f64 {
    ambient / (ambient + lambda)
}

/// Fetches jump `index`, reporting a non-extendable function that ran dry
/// as an exhausted race.
pub(crate) fn race_jump(s: &mut JumpFunction, index: usize) -> Result<(f64, f64)> {
    s.jump(index).map_err(|e| match e {
        Error::DomainExhausted { .. } => Error::Exhausted { visited: index },
        other => other,
    })
}

fn check_ambient(ambient: f64) -> Result<()> {
    if ambient > 0.0 && ambient.is_finite() {
        Ok(())
    } else {
        Err(invalid("ambient", format!("{ambient} must be positive and finite")))
    }
}

/// A race that either stopped or ran past the last jump of a finite
/// function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RaceRun {
    Stopped(RaceOutcome),
    /// Every jump was visited without the ambient clock ringing.
    Escaped { visited: Vec<Visit> },
}

/// [`run_race`] that reports exhaustion of a finite function as
/// [`RaceRun::Escaped`], keeping the visited sojourns. Consumes the stream
/// exactly as `run_race` does.
pub fn race(s: &mut JumpFunction, ambient: f64, stream: &mut RandomStream) -> Result<RaceRun> {
    check_ambient(ambient)?;
    let mut visited = Vec::new();
    let mut total = 0.0;
    for index in 0.. {
        let (location, gamma) = match race_jump(s, index) {
            Ok(j) => j,
            Err(Error::Exhausted { .. }) => return Ok(RaceRun::Escaped { visited }),
            Err(e) => return Err(e),
        };
        let rate = 1.0 / gamma;
        let sojourn = stream.exp1() / (ambient + rate);
        total += sojourn;
        visited.push(Visit { location, rate, sojourn });
        if stream.uniform_open() < stop_probability(ambient, rate) {
            let overshoot = stream.exp1() * gamma;
            return Ok(RaceRun::Stopped(RaceOutcome {
                visited,
                stop_index: index,
                stop_location: location,
                undershoot: sojourn,
                overshoot,
                total_time: total,
            }));
        }
    }
    unreachable!()
}

pub fn run_race(s: &mut JumpFunction, ambient: f64, stream: &mut RandomStream) -> Result<RaceOutcome> {
    match race(s, ambient, stream)? {
        RaceRun::Stopped(o) => Ok(o),
        RaceRun::Escaped { visited } => Err(Error::Exhausted { visited: visited.len() }),
    }
}

/// `P(R > r)`: the product of `lambda / (ambient + lambda)` over jumps `<= r`.
pub fn stop_tail(s: &mut JumpFunction, ambient: f64, r: f64) -> Result<f64> {
    check_ambient(ambient)?;
    s.extend_to(r)?;
    Ok(s
        .generated()
        .iter()
        .take_while(|j| j.0 <= r)
        .map(|&(_, g)| {
            let lambda = 1.0 / g;
            lambda / (ambient + lambda)
        })
        .product())
}

/// The race read off its definition: draw `L = E / ambient`, mark every jump
/// of the (finite) function, and find where the marked clock first passes
/// `L`. Only used as an oracle for the sequential sampler.
pub fn run_race_by_definition(
    s: &JumpFunction,
    ambient: f64,
    stream: &mut RandomStream,
) -> Result<RaceOutcome> {
    check_ambient(ambient)?;
    if s.is_extendable() {
        return Err(Error::Unsupported(
            "the definition-driven race needs a finite jump function".into(),
        ));
    }
    let horizon = stream.exp1() / ambient;
    let clock = clock_part(s, stream);
    let mut visited = Vec::new();
    let mut before = 0.0;
    for (index, (location, increment)) in clock.jumps().enumerate() {
        let gamma = s.generated()[index].1;
        let rate = 1.0 / gamma;
        if before + increment > horizon {
            let undershoot = horizon - before;
            visited.push(Visit { location, rate, sojourn: undershoot });
            return Ok(RaceOutcome {
                visited,
                stop_index: index,
                stop_location: location,
                undershoot,
                overshoot: before + increment - horizon,
                total_time: horizon,
            });
        }
        visited.push(Visit { location, rate, sojourn: increment });
        before += increment;
    }
    Err(Error::Exhausted { visited: visited.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_jumps(n: usize) -> JumpFunction {
        JumpFunction::from_jumps((1..=n).map(|i| (i as f64, 1.0)).collect()).unwrap()
    }

    #[test]
    fn second_of_three_unit_jumps() {
        let mut s = unit_jumps(3);
        let mut rng = RandomStream::from_seed(11);
        let n = 200_000;
        let hits = (0..n)
            .filter(|_| matches!(run_race(&mut s, 1.0, &mut rng), Ok(o) if o.stop_index == 1))
            .count();
        let p = hits as f64 / n as f64;
        let se = (0.25 * 0.75 / n as f64).sqrt();
        assert!((p - 0.25).abs() < 3.0 * se, "{p}");
    }

    #[test]
    fn outcome_invariants() {
        let mut s = unit_jumps(40);
        let mut rng = RandomStream::from_seed(3);
        for _ in 0..1000 {
            let o = run_race(&mut s, 0.7, &mut rng).unwrap();
            assert_eq!(o.visited.last().unwrap().location, o.stop_location);
            let sum: f64 = o.visited.iter().map(|v| v.sojourn).sum();
            assert!((sum - o.total_time).abs() <= 1e-12 * o.total_time);
            assert!(o.visited.iter().all(|v| v.sojourn > 0.0));
            assert!(o.overshoot > 0.0);
        }
    }

    #[test]
    fn sojourn_mean_at_gamma_two() {
        let mut s = JumpFunction::from_jumps(vec![(1.0, 2.0), (2.0, 1e9)]).unwrap();
        let mut rng = RandomStream::from_seed(5);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| run_race(&mut s, 1.0, &mut rng).unwrap().visited[0].sojourn)
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 2.0 / 3.0).abs() < 3.0 * (var / n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn stop_tail_examples() {
        let mut s = unit_jumps(3);
        assert_eq!(stop_tail(&mut s, 1.0, 0.5).unwrap(), 1.0);
        assert_eq!(stop_tail(&mut s, 1.0, 3.0).unwrap(), 0.125);
    }

    #[test]
    fn exhaustion_is_reported() {
        let mut s = JumpFunction::from_jumps(vec![(1.0, 1e6)]).unwrap();
        let mut rng = RandomStream::from_seed(1);
        let mut seen = false;
        for _ in 0..100 {
            if let Err(Error::Exhausted { visited }) = run_race(&mut s, 1e-3, &mut rng) {
                assert_eq!(visited, 1);
                seen = true;
            }
        }
        assert!(seen);
        assert!(run_race(&mut s, 0.0, &mut rng).is_err());
        let mut a = RandomStream::from_seed(2);
        let mut b = RandomStream::from_seed(2);
        for _ in 0..100 {
            match (race(&mut s, 1e-3, &mut a).unwrap(), run_race(&mut s, 1e-3, &mut b)) {
                (RaceRun::Stopped(x), Ok(y)) => assert_eq!(x, y),
                (RaceRun::Escaped { visited }, Err(Error::Exhausted { visited: n })) => assert_eq!(visited.len(), n),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn definition_race_total_time_is_l() {
        let s = unit_jumps(200);
        let mut rng = RandomStream::from_seed(9);
        let o = run_race_by_definition(&s, 1.0, &mut rng).unwrap();
        let sum: f64 = o.visited.iter().map(|v| v.sojourn).sum();
        assert!((sum - o.total_time).abs() < 1e-12);
    }
}
