//! One suite per command. Each fills a [`Report`] and returns early on the
//! first hard error, keeping the rows finished so far.

use rayon::prelude::*;
use trapcascade::{InvariantReport, Result, TrajectorySampler};

pub mod aging;
pub mod dl;
pub mod equilibrium;
pub mod laplace;
pub mod limits;
pub mod race;
pub mod selfsim;
pub mod simulate;

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample Pearson correlation; zero when either side is constant.
pub(crate) fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

pub(crate) fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Some point strictly after `t`, so that `Z(t)` is inside the horizon.
pub(crate) fn past(t: f64) -> f64 {
    t * (1.0 + 1e-9) + f64::MIN_POSITIVE
}

/// `Z_j(t)` for every level, one row per replica, with the merged invariant
/// report of all trajectories.
pub(crate) fn z_at(sampler: &dyn TrajectorySampler, t: f64, replicas: u64) -> Result<(Vec<Vec<f64>>, InvariantReport)> {
    let per: Vec<(Vec<f64>, InvariantReport)> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let traj = sampler.sample(r, past(t))?;
            Ok((traj.value_at(t)?.z.to_vec(), traj.check_invariants()))
        })
        .collect::<Result<_>>()?;
    let mut inv = InvariantReport::default();
    let rows = per
        .into_iter()
        .map(|(z, rep)| {
            inv.merge(&rep);
            z
        })
        .collect();
    Ok((rows, inv))
}

/// Column `level` (1-based) of [`z_at`] rows.
pub(crate) fn column(rows: &[Vec<f64>], level: usize) -> Vec<f64> {
    rows.iter().map(|r| r[level - 1]).collect()
}

/// Empirical CDF at `points` evenly spaced quantiles, for plotting.
pub(crate) fn ecdf_points(xs: &[f64], points: usize) -> Vec<[f64; 3]> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    (1..=points)
        .map(|i| {
            let k = (i * n / (points + 1)).min(n - 1);
            [v[k], (k + 1) as f64 / n as f64, 0.0]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_cases() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&x, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&x, &[1.0; 4]), 0.0);
    }

    #[test]
    fn ecdf_is_monotone() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 100) as f64).collect();
        let p = ecdf_points(&xs, 9);
        assert!(p.windows(2).all(|w| w[0][0] <= w[1][0] && w[0][1] < w[1][1]));
    }
}
