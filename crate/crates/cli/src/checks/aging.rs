//! Aging functions against their Beta-product limits.

use trapcascade::aging::{aging_panel, f_limit, f_limit_mc, EstimatorKind, FMethod, WindowEstimates};
use trapcascade::limits::{aging_process_sampler, k_process_sampler, RegimeSpec};
use trapcascade::rng_heavy::derive_seed;
use trapcascade::{AgingEstimate, RegimeSampler, Result, TrajectorySampler};

use crate::config::{AgingConfig, ProviderConfig};
use crate::report::{num, Report};

pub const HEADER: &[&str] = &[
    "regime", "j", "t_w", "t", "kind", "value", "stderr", "replicas", "f_limit", "abs_diff",
];

/// The trajectory family described by `cfg`.
pub fn sampler(cfg: &ProviderConfig, seed: u64) -> Result<Box<dyn TrajectorySampler>> {
    Ok(match cfg {
        ProviderConfig::Regime { alphas, regime } => {
            Box::new(RegimeSampler::new(RegimeSpec::new(alphas.clone(), regime.clone())?, seed)?)
        }
        ProviderConfig::AgingProcess { alphas, eps } => {
            Box::new(aging_process_sampler(alphas, *eps, seed)?)
        }
        ProviderConfig::KProcess { alphas, eps } => Box::new(k_process_sampler(alphas, *eps, seed)?),
    })
}

pub fn chosen(w: &WindowEstimates, kind: EstimatorKind) -> AgingEstimate {
    match kind {
        EstimatorKind::Indicator => w.pi_indicator,
        EstimatorKind::ExponentialFunctional => w.pi_exponential,
    }
}

pub fn run(cfg: &AgingConfig, seed: u64, report: &mut Report) -> Result<()> {
    let alphas = cfg.provider.alphas().to_vec();
    let label = cfg.provider.label();
    let s = sampler(&cfg.provider, seed)?;
    let windows: Vec<(usize, f64, f64)> = cfg.thetas.iter().map(|&th| (cfg.level, cfg.t_w, th * cfg.t_w)).collect();
    let panel = aging_panel(s.as_ref(), &windows, cfg.replicas)?;
    report.structural.add_paths(cfg.replicas as usize, &panel.invariants);

    let mut targets = Vec::new();
    let mut plot = Vec::new();
    for (w, &theta) in panel.windows.iter().zip(&cfg.thetas) {
        let f = f_limit(&alphas, cfg.level, theta, FMethod::Quadrature, cfg.f_tol)?;
        targets.push(serde_json::json!({ "theta": theta, "f": f }));
        let est = chosen(w, cfg.estimator);
        report.check_at_most(
            format!("pi_{}_theta={theta}", cfg.level),
            (est.value - f).abs(),
            cfg.abs_tol,
            format!("{:?} estimate against f = {f}", cfg.estimator),
        );
        report.check_flag(
            format!("r_dominates_pi_theta={theta}"),
            w.r_below_pi == 0,
            format!("{} replicas with a no-jump window but a changed state", w.r_below_pi),
        );
        if let Some(n) = cfg.mc_samples {
            let mc = f_limit_mc(&alphas, cfg.level, theta, n, derive_seed(seed, theta.to_bits()))?;
            report.check_at_most(
                format!("f_quadrature_vs_mc_theta={theta}"),
                (mc.value - f).abs(),
                cfg.mc_tol,
                format!("{n} samples, stderr {}", mc.stderr),
            );
            report.estimate(format!("f_mc_theta={theta}"), mc);
        }
        for (kind, e, target) in [
            ("indicator", w.pi_indicator, f),
            ("exponential", w.pi_exponential, f),
            ("r", w.r, f64::NAN),
            ("novelty", w.novelty, f64::NAN),
        ] {
            report.row(vec![
                label.clone(),
                cfg.level.to_string(),
                num(w.t_w),
                num(w.t),
                kind.into(),
                num(e.value),
                num(e.stderr),
                e.replicas.to_string(),
                num(target),
                num((e.value - target).abs()),
            ]);
        }
        plot.push([theta, est.value, est.stderr]);
    }
    report.plot("pi", plot);
    report.plot(
        "f_limit",
        (1..=40)
            .map(|i| {
                let theta = i as f64 * 0.1;
                Ok([theta, f_limit(&alphas, cfg.level, theta, FMethod::Quadrature, cfg.f_tol)?, 0.0])
            })
            .collect::<Result<_>>()?,
    );
    report.estimate("targets", targets);
    report.estimate("windows", &panel.windows);
    Ok(())
}
