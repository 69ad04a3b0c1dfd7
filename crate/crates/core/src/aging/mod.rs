//! Aging statistics, their Beta-product limits and supporting numerics.

mod ks;
mod quadrature;
mod special;

pub use ks::{ks_distance, ks_two_sample, ks_two_sample_critical_5pct};
pub use quadrature::integrate;
pub use special::{incomplete_beta, incomplete_beta_upper, ln_beta};

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::cascade::{InvariantReport, TrajectorySampler};
use crate::error::{invalid, Error, Result};
use crate::race::race_jump;
use crate::rng_heavy::{beta_sample, check_index, path_stream, stable_jump_set, PathKey, StableSpec};

const MC_TAG: u32 = 0xbe7a_0000;
const DL_TAG: u32 = 0xd100_0000;
const MC_CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorKind {
    Indicator,
    ExponentialFunctional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgingEstimate {
    pub value: f64,
    pub stderr: f64,
    pub replicas: usize,
    pub kind: EstimatorKind,
}

impl AgingEstimate {
    pub fn from_values(values: &[f64], kind: EstimatorKind) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Ok(Self {
            value: mean,
            stderr: (var / n).sqrt(),
            replicas: values.len(),
            kind,
        })
    }

    fn from_flags(flags: impl Iterator<Item = bool>) -> Result<Self> {
        let v: Vec<f64> = flags.map(|b| if b { 1.0 } else { 0.0 }).collect();
        Self::from_values(&v, EstimatorKind::Indicator)
    }

    /// `sqrt(se_a^2 + se_b^2)`.
    pub fn combined_stderr(&self, other: &AgingEstimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }
}

/// Everything measured for one `(level, t_w, t)` window over shared replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEstimates {
    pub level: usize,
    pub t_w: f64,
    pub t: f64,
    pub pi_indicator: AgingEstimate,
    pub pi_exponential: AgingEstimate,
    pub r: AgingEstimate,
    pub novelty: AgingEstimate,
    /// Replicas where a no-jump window did not keep the same state; zero
    /// for any consistent trajectory.
    pub r_below_pi: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub windows: Vec<WindowEstimates>,
    pub invariants: InvariantReport,
    pub replicas: u64,
}

#[derive(Clone, Copy)]
struct ReplicaWindow {
    no_jump: bool,
    exp_functional: f64,
    same: bool,
    novel: bool,
}

fn check_window(t_w: f64, t: f64) -> Result<()> {
    if !(t_w >= 0.0 && t_w.is_finite()) {
        return Err(invalid("t_w", format!("{t_w} must be nonnegative")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("{t} must be nonnegative")));
    }
    Ok(())
}

/// Runs `replicas` trajectories up to the largest `t_w + t` and evaluates
/// every statistic on every window.
pub fn aging_panel(
    runner: &dyn TrajectorySampler,
    windows: &[(usize, f64, f64)],
    replicas: u64,
) -> Result<Panel> {
    if replicas == 0 {
        return Err(invalid("replicas", "must be at least 1"));
    }
    if windows.is_empty() {
        return Err(invalid("windows", "at least one window is required"));
    }
    for &(level, t_w, t) in windows {
        check_window(t_w, t)?;
        if level == 0 || level > runner.levels() {
            return Err(invalid("level", format!("{level} outside 1..={}", runner.levels())));
        }
    }
    let horizon = windows
        .iter()
        .map(|w| w.1 + w.2)
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let per_replica: Vec<(Vec<ReplicaWindow>, InvariantReport)> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let traj = runner.sample(r, horizon)?;
            let stats = windows
                .iter()
                .map(|&(level, t_w, t)| {
                    let z = traj.value_at(t_w)?.z[level - 1];
                    Ok(ReplicaWindow {
                        no_jump: traj.no_jump(level, t_w, t)?,
                        exp_functional: (-t / z).exp(),
                        same: traj.same_state(level, t_w, t)?,
                        novel: traj.novel(level, t_w, t)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((stats, traj.check_invariants()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut invariants = InvariantReport::default();
    for (_, rep) in &per_replica {
        invariants.merge(rep);
    }
    let windows = windows
        .iter()
        .enumerate()
        .map(|(i, &(level, t_w, t))| {
            let col = || per_replica.iter().map(move |(s, _)| s[i]);
            let exp: Vec<f64> = col().map(|s| s.exp_functional).collect();
            Ok(WindowEstimates {
                level,
                t_w,
                t,
                pi_indicator: AgingEstimate::from_flags(col().map(|s| s.no_jump))?,
                pi_exponential: AgingEstimate::from_values(&exp, EstimatorKind::ExponentialFunctional)?,
                r: AgingEstimate::from_flags(col().map(|s| s.same))?,
                novelty: AgingEstimate::from_flags(col().map(|s| s.novel))?,
                r_below_pi: col().filter(|s| s.no_jump && !s.same).count(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Panel {
        windows,
        invariants,
        replicas,
    })
}

/// `P(no jump of Z_level during [t_w, t_w + t])`.
pub fn estimate_pi(
    runner: &dyn TrajectorySampler,
    level: usize,
    t_w: f64,
    t: f64,
    replicas: u64,
    kind: EstimatorKind,
) -> Result<AgingEstimate> {
    let w = aging_panel(runner, &[(level, t_w, t)], replicas)?.windows.remove(0);
    Ok(match kind {
        EstimatorKind::Indicator => w.pi_indicator,
        EstimatorKind::ExponentialFunctional => w.pi_exponential,
    })
}

/// `P(Z_level(t_w) = Z_level(t_w + t))`, by state identity.
pub fn estimate_r(runner: &dyn TrajectorySampler, level: usize, t_w: f64, t: f64, replicas: u64) -> Result<AgingEstimate> {
    Ok(aging_panel(runner, &[(level, t_w, t)], replicas)?.windows.remove(0).r)
}

/// `P(max_[0,t_w] Z_level < max_[t_w,t_w+t] Z_level)`.
pub fn estimate_novelty(
    runner: &dyn TrajectorySampler,
    level: usize,
    t_w: f64,
    t: f64,
    replicas: u64,
) -> Result<AgingEstimate> {
    Ok(aging_panel(runner, &[(level, t_w, t)], replicas)?.windows.remove(0).novelty)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FMethod {
    Quadrature,
    MonteCarlo { samples: u64, seed: u64 },
}

fn check_alphas(alphas: &[f64], level: usize) -> Result<()> {
    if level == 0 || level > alphas.len() {
        return Err(invalid("level", format!("{level} outside 1..={}", alphas.len())));
    }
    alphas[..level].iter().try_for_each(|&a| check_index(a))
}

/// `B(1 - alpha, alpha) = pi / sin(pi alpha)`.
fn beta_norm(alpha: f64) -> f64 {
    PI / (PI * alpha).sin()
}

/// `P(B_1 ... B_j > x)` with `B_i ~ Beta(1 - alpha_i, alpha_i)`.
fn product_tail(alphas: &[f64], x: f64, tol: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x >= 1.0 {
        return 0.0;
    }
    let (&alpha, rest) = alphas.split_last().expect("nonempty alphas");
    if rest.is_empty() {
        return incomplete_beta_upper(1.0 - alpha, alpha, x).expect("valid beta parameters");
    }
    // b = 1 - (1 - x) v^(1/alpha) absorbs the (1 - b)^(alpha - 1) singularity
    let width = 1.0 - x;
    let (v, _) = integrate(
        |v| {
            let b = 1.0 - width * v.powf(1.0 / alpha);
            if b <= x {
                return 0.0;
            }
            product_tail(rest, x / b, tol * 0.1) * b.powf(-alpha)
        },
        0.0,
        1.0,
        tol,
    );
    (width.powf(alpha) / (alpha * beta_norm(alpha)) * v).clamp(0.0, 1.0)
}

/// `f_j(theta) = P(B_1 ... B_j > theta / (1 + theta))`.
pub fn f_limit(alphas: &[f64], level: usize, theta: f64, method: FMethod, tol: f64) -> Result<f64> {
    check_alphas(alphas, level)?;
    if !(theta >= 0.0) {
        return Err(invalid("theta", format!("{theta} is negative")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("{tol} must be positive")));
    }
    match method {
        FMethod::Quadrature => {
            if theta.is_infinite() {
                return Ok(0.0);
            }
            Ok(product_tail(&alphas[..level], theta / (1.0 + theta), tol))
        }
        FMethod::MonteCarlo { samples, seed } => Ok(f_limit_mc(alphas, level, theta, samples, seed)?.value),
    }
}

/// Monte Carlo estimate of `f_j(theta)` from products of Beta draws.
pub fn f_limit_mc(alphas: &[f64], level: usize, theta: f64, samples: u64, seed: u64) -> Result<AgingEstimate> {
    check_alphas(alphas, level)?;
    if samples == 0 {
        return Err(invalid("samples", "must be at least 1"));
    }
    let threshold = theta / (1.0 + theta);
    let chunks = samples.div_ceil(MC_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = path_stream(seed, &PathKey::new([c], MC_TAG));
            let n = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut hits = 0u64;
            for _ in 0..n {
                let mut p = 1.0;
                for &a in &alphas[..level] {
                    p *= beta_sample(1.0 - a, a, &mut s).expect("valid beta parameters");
                }
                hits += u64::from(p > threshold);
            }
            hits
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let p = hits as f64 / samples as f64;
    Ok(AgingEstimate {
        value: p,
        stderr: (p * (1.0 - p) / samples as f64).sqrt(),
        replicas: samples as usize,
        kind: EstimatorKind::Indicator,
    })
}

/// `(sin(pi alpha) / pi) * integral_0^1 (theta + u)^(-alpha) (1 - u)^(alpha - 1) du`.
pub fn dl_no_jump_prob(alpha: f64, theta: f64) -> Result<f64> {
    check_index(alpha)?;
    if !(theta >= 0.0) {
        return Err(invalid("theta", format!("{theta} is negative")));
    }
    let tol = 1e-15;
    // [0, 1/2] with u = w^(1/(1 - alpha)), which tames u^(-alpha) at theta = 0
    let p = 1.0 / (1.0 - alpha);
    let w_hi = 0.5f64.powf(1.0 - alpha);
    let (left, _) = integrate(
        |w| {
            if w == 0.0 {
                return if theta == 0.0 { p } else { 0.0 };
            }
            let u = w.powf(p);
            p * (u / (theta + u)).powf(alpha) * (1.0 - u).powf(alpha - 1.0)
        },
        0.0,
        w_hi,
        tol,
    );
    // [1/2, 1] with u = 1 - v^(1/alpha), which absorbs (1 - u)^(alpha - 1)
    let v_hi = 0.5f64.powf(alpha);
    let (right, _) = integrate(
        |v| {
            let u = 1.0 - v.powf(1.0 / alpha);
            (theta + u).powf(-alpha) / alpha
        },
        0.0,
        v_hi,
        tol,
    );
    Ok(((PI * alpha).sin() / PI * (left + right)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DLSample {
    /// `(t - last range point <= t) / t`.
    pub y: f64,
    /// `(first range point > t - t) / t`.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoJumpCheck {
    pub theta: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DLReport {
    pub alpha: f64,
    pub eps: f64,
    pub t: f64,
    pub samples: Vec<DLSample>,
    /// KS distance of `y` to Beta(1 - alpha, alpha).
    pub ks_age: f64,
    /// KS distance of `y` to Beta(alpha, 1 - alpha), the mirrored reading.
    pub ks_mirrored: f64,
    pub mean_y: f64,
    pub stderr_y: f64,
    pub no_jump: Vec<NoJumpCheck>,
    /// Whether jumps below `eps` were replaced by their drift.
    pub compensated: bool,
    /// `(t / eps)^(-alpha)`: chance that no jump above `eps` lands before the
    /// first one that crosses `t`, forcing `y = 1`.
    pub resolution: f64,
}

/// Last range point at or below `t` and first one above it, for one
/// truncated subordinator path.
///
/// With `compensate` the jumps below `eps` grow the path at their mean rate
/// between retained jumps. When `t` lands in such a stretch, the straddling
/// small jump is drawn from its stationary law: size density proportional to
/// `s^-alpha` on `(0, eps]`, split uniformly into age and overshoot.
fn straddle(spec: StableSpec, compensate: bool, t: f64, seed: u64, replica: u64) -> Result<DLSample> {
    let stream = path_stream(seed, &PathKey::new([replica], DL_TAG));
    let drift = if compensate { spec.dropped_mass_rate() } else { 0.0 };
    let mut s = stable_jump_set(spec, 0.0, 1.0, &stream)?;
    let mut jumps = 0.0;
    for i in 0.. {
        let (loc, g) = race_jump(&mut s, i)?;
        let before = jumps + drift * loc;
        if before >= t {
            let mut local = stream.fork(u64::MAX);
            let size = spec.epsilon() * local.uniform_open().powf(1.0 / (1.0 - spec.alpha()));
            let age = size * local.uniform_open();
            return Ok(DLSample {
                y: age / t,
                z: (size - age) / t,
            });
        }
        if before + g > t {
            return Ok(DLSample {
                y: (t - before) / t,
                z: (before + g - t) / t,
            });
        }
        jumps += g;
    }
    unreachable!()
}

pub fn dl_empirical(alpha: f64, eps: f64, t: f64, replicas: u64, seed: u64, thetas: &[f64]) -> Result<DLReport> {
    dl_empirical_with(alpha, eps, t, replicas, seed, thetas, true)
}

/// [`dl_empirical`] with the small-jump drift switchable; `compensate =
/// false` drops every jump below `eps` outright.
pub fn dl_empirical_with(
    alpha: f64,
    eps: f64,
    t: f64,
    replicas: u64,
    seed: u64,
    thetas: &[f64],
    compensate: bool,
) -> Result<DLReport> {
    let spec = StableSpec::new(alpha, eps)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("{t} must be positive")));
    }
    if replicas < 2 {
        return Err(Error::InsufficientSample { got: replicas as usize, needed: 2 });
    }
    let samples: Vec<DLSample> = (0..replicas)
        .into_par_iter()
        .map(|r| straddle(spec, compensate, t, seed, r))
        .collect::<Result<_>>()?;
    let ys: Vec<f64> = samples.iter().map(|s| s.y).collect();
    let ks_age = ks_distance(&ys, |y| incomplete_beta(1.0 - alpha, alpha, y.clamp(0.0, 1.0)).unwrap())?;
    let ks_mirrored = ks_distance(&ys, |y| incomplete_beta(alpha, 1.0 - alpha, y.clamp(0.0, 1.0)).unwrap())?;
    let est = AgingEstimate::from_values(&ys, EstimatorKind::Indicator)?;
    let no_jump = thetas
        .iter()
        .map(|&theta| {
            let e = AgingEstimate::from_flags(samples.iter().map(|s| s.z > theta))?;
            Ok(NoJumpCheck {
                theta,
                empirical: e.value,
                stderr: e.stderr,
                target: dl_no_jump_prob(alpha, theta)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DLReport {
        alpha,
        eps,
        t,
        samples,
        ks_age,
        ks_mirrored,
        mean_y: est.value,
        stderr_y: est.stderr,
        no_jump,
        compensated: compensate,
        resolution: (t / eps).powf(-alpha),
    })
}

/// `n^-(1-nu) * sum_{i<=n} (1 - exp(-theta tau_i / n^(nu/alpha)))`.
pub fn laplace_exponent(tau: &[f64], n: usize, nu: f64, alpha: f64, theta: f64) -> Result<f64> {
    if tau.len() < n {
        return Err(Error::InsufficientSample { got: tau.len(), needed: n });
    }
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if !(nu > 0.0 && nu < 1.0) {
        return Err(invalid("nu", format!("{nu} outside (0, 1)")));
    }
    check_index(alpha)?;
    let nf = n as f64;
    let scale = theta / nf.powf(nu / alpha);
    let sum: f64 = tau[..n].iter().map(|&x| -(-scale * x).exp_m1()).sum();
    Ok(sum * nf.powf(-(1.0 - nu)))
}

/// `Gamma(1 - alpha) theta^alpha`.
pub fn laplace_limit(alpha: f64, theta: f64) -> f64 {
    gamma(1.0 - alpha) * theta.powf(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_limit_examples() {
        let q = FMethod::Quadrature;
        assert_eq!(f_limit(&[0.5, 0.3], 2, 0.0, q, 1e-8).unwrap(), 1.0);
        assert!((f_limit(&[0.5], 1, 1.0, q, 1e-10).unwrap() - 0.5).abs() < 1e-12);
        assert!((f_limit(&[0.5], 1, 3.0, q, 1e-10).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(f_limit(&[0.5], 2, 1.0, q, 1e-8).is_err());
    }

    #[test]
    fn f_limit_two_level_against_independent_integral() {
        // Integrate over B1 ~ arcsine with b = sin^2(phi), which flattens its
        // density to 2/pi, against the Beta(0.7, 0.3) survival of B2.
        let (a2, theta) = (0.3f64, 1.0f64);
        let x = theta / (1.0 + theta);
        let (v, _) = integrate(
            |phi| {
                let b = phi.sin().powi(2);
                if b <= x {
                    return 0.0;
                }
                2.0 / PI * incomplete_beta_upper(1.0 - a2, a2, (x / b).min(1.0)).unwrap()
            },
            x.sqrt().asin(),
            PI / 2.0,
            1e-13,
        );
        let q = f_limit(&[0.5, a2], 2, theta, FMethod::Quadrature, 1e-10).unwrap();
        assert!((q - v).abs() < 1e-8, "{q} {v}");
        let swapped = f_limit(&[a2, 0.5], 2, theta, FMethod::Quadrature, 1e-10).unwrap();
        assert!((q - swapped).abs() < 1e-8, "{q} {swapped}");
    }

    #[test]
    fn dl_matches_f1() {
        for &alpha in &[0.2, 0.5, 0.7, 0.9] {
            assert!((dl_no_jump_prob(alpha, 0.0).unwrap() - 1.0).abs() < 1e-12);
            for &theta in &[0.01, 0.5, 1.0, 3.0, 20.0] {
                let d = dl_no_jump_prob(alpha, theta).unwrap();
                let f = f_limit(&[alpha], 1, theta, FMethod::Quadrature, 1e-12).unwrap();
                assert!((d - f).abs() < 1e-10, "{alpha} {theta}: {d} vs {f}");
            }
        }
        assert!((dl_no_jump_prob(0.5, 3.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn laplace_trivial_cases() {
        assert_eq!(laplace_exponent(&[1.0, 2.0], 2, 0.5, 0.5, 0.0).unwrap(), 0.0);
        assert!(matches!(
            laplace_exponent(&[1.0], 2, 0.5, 0.5, 1.0),
            Err(Error::InsufficientSample { got: 1, needed: 2 })
        ));
    }

    #[test]
    fn estimate_from_values() {
        let e = AgingEstimate::from_values(&[1.0, 0.0, 1.0, 0.0], EstimatorKind::Indicator).unwrap();
        assert_eq!(e.value, 0.5);
        assert!((e.stderr - (1.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
