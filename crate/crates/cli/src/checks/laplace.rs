//! Laplace exponent of the rescaled depth sum.

use trapcascade::aging::{laplace_exponent, laplace_limit};
use trapcascade::rng_heavy::derive_seed;
use trapcascade::{Environment, Result, VolumeSpec};

use crate::config::LaplaceConfig;
use crate::report::{num, Report};

pub const HEADER: &[&str] = &["env_seed", "theta", "phi", "target", "rel_err"];

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn run(cfg: &LaplaceConfig, seed: u64, report: &mut Report) -> Result<()> {
    let spec = VolumeSpec::new(vec![cfg.n], vec![cfg.alpha])?;
    let mut errs = vec![Vec::new(); cfg.thetas.len()];
    let mut at_one = Vec::new();
    let mut ratio = Vec::new();
    for i in 0..cfg.env_seeds {
        let env_seed = derive_seed(seed, i);
        let env = Environment::new(spec.clone(), env_seed);
        let tau: Vec<f64> = (1..=cfg.n).map(|x| env.tau(&[x])).collect();
        for (slot, &theta) in cfg.thetas.iter().enumerate() {
            let phi = laplace_exponent(&tau, cfg.n, cfg.nu, cfg.alpha, theta)?;
            let target = laplace_limit(cfg.alpha, theta);
            let rel = (phi / target - 1.0).abs();
            errs[slot].push(rel);
            report.row(vec![env_seed.to_string(), num(theta), num(phi), num(target), num(rel)]);
        }
        let p1 = laplace_exponent(&tau, cfg.n, cfg.nu, cfg.alpha, 1.0)?;
        let p4 = laplace_exponent(&tau, cfg.n, cfg.nu, cfg.alpha, 4.0)?;
        at_one.push(p1);
        ratio.push(p4 / p1);
    }
    let mut plot = Vec::new();
    for (slot, &theta) in cfg.thetas.iter().enumerate() {
        let med = median(errs[slot].clone());
        report.check_at_most(
            format!("median_rel_err_theta={theta}"),
            med,
            cfg.rel_tol,
            format!("median over {} environments", cfg.env_seeds),
        );
        plot.push([theta, med, 0.0]);
    }
    report.plot("median_rel_err", plot);
    report.estimate("median_phi_1", median(at_one));
    report.estimate("limit_phi_1", laplace_limit(cfg.alpha, 1.0));
    report.estimate("median_ratio_phi4_phi1", median(ratio));
    report.estimate("limit_ratio_phi4_phi1", 4f64.powf(cfg.alpha));
    Ok(())
}
