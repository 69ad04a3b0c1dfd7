//! Scale invariance of the cascading aging process.

use trapcascade::aging::{aging_panel, ks_two_sample, ks_two_sample_critical_5pct};
use trapcascade::rng_heavy::derive_seed;
use trapcascade::Result;

use super::aging::{chosen, sampler};
use super::{column, z_at};
use crate::config::{ProviderConfig, SelfsimConfig};
use crate::report::{num, Report};

pub const HEADER: &[&str] = &["stat", "c", "t_w", "t", "value", "stderr", "reference", "reference_stderr", "abs_diff"];

pub fn run(cfg: &SelfsimConfig, seed: u64, report: &mut Report) -> Result<()> {
    let provider = ProviderConfig::AgingProcess {
        alphas: cfg.alphas.clone(),
        eps: cfg.eps,
    };
    let j = cfg.level;
    // independent runs for the two times
    let a = sampler(&provider, derive_seed(seed, 1))?;
    let b = sampler(&provider, derive_seed(seed, 2))?;
    let (za, inv_a) = z_at(a.as_ref(), cfg.t, cfg.replicas)?;
    report.structural.add_paths(za.len(), &inv_a);
    let (zb, inv_b) = z_at(b.as_ref(), cfg.c * cfg.t, cfg.replicas)?;
    report.structural.add_paths(zb.len(), &inv_b);
    let za = column(&za, j);
    let zb: Vec<f64> = column(&zb, j).into_iter().map(|z| z / cfg.c).collect();
    let d = ks_two_sample(&za, &zb)?;
    report.check_at_most(
        format!("z_scaling_ks_c={}", cfg.c),
        d,
        cfg.ks_max,
        format!("Z_{j}({}) against Z_{j}({}) / {}", cfg.t, cfg.c * cfg.t, cfg.c),
    );
    report.estimate("ks", d);
    report.estimate("ks_critical_5pct", ks_two_sample_critical_5pct(za.len(), zb.len()));
    report.row(vec![
        "z_ks".into(),
        num(cfg.c),
        num(f64::NAN),
        num(cfg.t),
        num(d),
        num(f64::NAN),
        num(0.0),
        num(f64::NAN),
        num(d),
    ]);
    report.plot("z_ecdf", super::ecdf_points(&za, 99));
    report.plot("z_scaled_ecdf", super::ecdf_points(&zb, 99));

    let mut windows = vec![(j, cfg.t_w, cfg.t_pi)];
    windows.extend(cfg.cs.iter().map(|&c| (j, c * cfg.t_w, c * cfg.t_pi)));
    let runner = sampler(&provider, derive_seed(seed, 3))?;
    let panel = aging_panel(runner.as_ref(), &windows, cfg.replicas)?;
    report.structural.add_paths(cfg.replicas as usize, &panel.invariants);
    let base = chosen(&panel.windows[0], cfg.estimator);
    let mut plot = vec![[1.0, base.value, base.stderr]];
    for (w, &c) in panel.windows[1..].iter().zip(&cfg.cs) {
        let e = chosen(w, cfg.estimator);
        let se = e.combined_stderr(&base);
        report.check_at_most(
            format!("pi_invariance_c={c}"),
            (e.value - base.value).abs(),
            cfg.sigmas * se,
            format!("window ({}, {}) against ({}, {})", w.t_w, w.t, cfg.t_w, cfg.t_pi),
        );
        report.row(vec![
            "pi".into(),
            num(c),
            num(w.t_w),
            num(w.t),
            num(e.value),
            num(e.stderr),
            num(base.value),
            num(base.stderr),
            num((e.value - base.value).abs()),
        ]);
        plot.push([c, e.value, e.stderr]);
    }
    report.plot("pi_by_scale", plot);
    report.estimate("windows", &panel.windows);
    Ok(())
}
