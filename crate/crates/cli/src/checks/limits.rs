//! Ergodic-regime trap model against the cascading K-process.

use trapcascade::aging::{ks_two_sample, ks_two_sample_critical_5pct};
use trapcascade::limits::{fine_tuning_bound, fine_tuning_deviation, Regime, RegimeSpec};
use trapcascade::rng_heavy::derive_seed;
use trapcascade::{RegimeSampler, Result};

use super::{column, z_at};
use crate::config::{LimitsConfig, ProviderConfig};
use crate::report::{num, Report};

pub const HEADER: &[&str] = &["n", "j", "volumes", "fine_tuning_deviation", "ks", "ks_critical_5pct"];

pub fn run(cfg: &LimitsConfig, seed: u64, report: &mut Report) -> Result<()> {
    let k = cfg.alphas.len();
    let limit = super::aging::sampler(
        &ProviderConfig::KProcess {
            alphas: cfg.alphas.clone(),
            eps: cfg.eps,
        },
        derive_seed(seed, 0x11),
    )?;
    let (zl, inv) = z_at(limit.as_ref(), cfg.t, cfg.replicas)?;
    report.structural.add_paths(zl.len(), &inv);
    let crit = ks_two_sample_critical_5pct(cfg.replicas as usize, cfg.replicas as usize);
    let mut by_level: Vec<Vec<f64>> = vec![Vec::new(); k];
    for (i, &n) in cfg.ns.iter().enumerate() {
        let spec = RegimeSpec::new(cfg.alphas.clone(), Regime::Ergodic { n })?;
        let volumes = spec.volumes();
        let dev = fine_tuning_deviation(&volumes, &cfg.alphas);
        if k > 1 {
            report.check_at_most(
                format!("fine_tuning_n={n}"),
                dev,
                fine_tuning_bound(n, &cfg.alphas) + 1e-12,
                format!("volumes {volumes:?}"),
            );
        }
        let finite = RegimeSampler::new(spec, derive_seed(seed, 0x100 + i as u64))?;
        let (zf, inv) = z_at(&finite, cfg.t, cfg.replicas)?;
        report.structural.add_paths(zf.len(), &inv);
        for j in 1..=k {
            let d = ks_two_sample(&column(&zf, j), &column(&zl, j))?;
            by_level[j - 1].push(d);
            report.row(vec![
                n.to_string(),
                j.to_string(),
                volumes.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(":"),
                num(dev),
                num(d),
                num(crit),
            ]);
        }
    }
    for (j, ks) in by_level.iter().enumerate() {
        let last = *ks.last().expect("at least one n");
        report.check_at_most(
            format!("ks_{}_n={}", j + 1, cfg.ns.last().unwrap()),
            last,
            cfg.ks_max,
            format!("Z_{}({}) against the K-process", j + 1, cfg.t),
        );
        if cfg.require_decreasing {
            let decreasing = ks.windows(2).all(|w| w[1] < w[0]);
            report.check_flag(format!("ks_{}_decreasing", j + 1), decreasing, format!("{ks:?}"));
        }
        report.plot(
            format!("ks_level{}", j + 1),
            cfg.ns.iter().zip(ks).map(|(&n, &d)| [n as f64, d, crit]).collect(),
        );
        report.estimate(format!("ks_level{}", j + 1), ks);
    }
    report.estimate("ks_critical_5pct", crit);
    Ok(())
}
