//! Kolmogorov-Smirnov distances.

use crate::error::{Error, Result};

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `sup_x |F_n(x) - cdf(x)|`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let v = sorted(samples);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        let f = cdf(v[i]);
        d = d.max(f - i as f64 / n).max((j + 1) as f64 / n - f);
        i = j + 1;
    }
    Ok(d)
}

/// `sup_x |F_a(x) - F_b(x)|` between two empirical distributions.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic two-sided critical value `c(level) * sqrt((n + m) / (n m))`
/// for the two-sample statistic, at the 5% level.
pub fn ks_two_sample_critical_5pct(n: usize, m: usize) -> f64 {
    1.358 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_heavy::RandomStream;

    #[test]
    fn quantile_sample_is_close() {
        let n = 999;
        let xs: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
        let d = ks_distance(&xs, |x| x).unwrap();
        assert!(d <= 1.0 / (n + 1) as f64 + 1e-12, "{d}");
    }

    #[test]
    fn constant_sample_is_far() {
        let xs = vec![0.3; 100];
        assert!(ks_distance(&xs, |x| x.clamp(0.0, 1.0)).unwrap() >= 0.5);
        assert!(matches!(ks_distance(&[], |x| x), Err(Error::EmptySample)));
    }

    #[test]
    fn uniform_sample() {
        let mut s = RandomStream::from_seed(17);
        let xs: Vec<f64> = (0..100_000).map(|_| s.uniform_open()).collect();
        assert!(ks_distance(&xs, |x| x).unwrap() < 0.01);
    }

    #[test]
    fn two_sample_cases() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert!((ks_two_sample(&[1.0, 3.0], &[2.0, 4.0]).unwrap() - 0.5).abs() < 1e-15);
        let mut s = RandomStream::from_seed(4);
        let a: Vec<f64> = (0..10_000).map(|_| s.exp1()).collect();
        let b: Vec<f64> = (0..10_000).map(|_| s.exp1()).collect();
        assert!(ks_two_sample(&a, &b).unwrap() < 0.03);
    }
}
