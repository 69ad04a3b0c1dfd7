//! Straddling range points of a stable subordinator.

use trapcascade::aging::{dl_empirical_with, dl_no_jump_prob, f_limit, incomplete_beta, FMethod};
use trapcascade::rng_heavy::derive_seed;
use trapcascade::Result;

use crate::config::DlConfig;
use crate::report::{num, Report};

pub const HEADER: &[&str] = &["alpha", "stat", "theta", "empirical", "stderr", "target", "abs_diff"];

const IDENTITY_TOL: f64 = 1e-10;

pub fn run(cfg: &DlConfig, seed: u64, report: &mut Report) -> Result<()> {
    for (i, &alpha) in cfg.alphas.iter().enumerate() {
        let r = dl_empirical_with(
            alpha,
            cfg.eps,
            cfg.t,
            cfg.replicas,
            derive_seed(seed, i as u64),
            &cfg.thetas,
            cfg.compensate,
        )?;
        let tag = format!("alpha={alpha}");
        report.check_at_most(
            format!("age_ks_{tag}"),
            r.ks_age,
            cfg.ks_max,
            format!("age statistic against Beta({}, {alpha})", 1.0 - alpha),
        );
        report.row(vec![
            num(alpha),
            "ks_age".into(),
            num(f64::NAN),
            num(r.ks_age),
            num(f64::NAN),
            num(0.0),
            num(r.ks_age),
        ]);
        report.row(vec![
            num(alpha),
            "ks_mirrored".into(),
            num(f64::NAN),
            num(r.ks_mirrored),
            num(f64::NAN),
            num(0.0),
            num(r.ks_mirrored),
        ]);
        report.row(vec![
            num(alpha),
            "mean_y".into(),
            num(f64::NAN),
            num(r.mean_y),
            num(r.stderr_y),
            num(1.0 - alpha),
            num((r.mean_y - (1.0 - alpha)).abs()),
        ]);
        if alpha == 0.5 {
            report.check_at_most(
                format!("age_symmetry_{tag}"),
                (r.mean_y - 0.5).abs(),
                cfg.sigmas * r.stderr_y,
                "mean age statistic at alpha = 1/2",
            );
        }
        let mut plot = Vec::new();
        for nj in &r.no_jump {
            report.check_at_most(
                format!("no_jump_{tag}_theta={}", nj.theta),
                (nj.empirical - nj.target).abs(),
                cfg.sigmas * nj.stderr,
                format!("P(overshoot > {}) = {}", nj.theta, nj.target),
            );
            let f = f_limit(&[alpha], 1, nj.theta, FMethod::Quadrature, 1e-12)?;
            let via = dl_no_jump_prob(alpha, nj.theta)?;
            report.check_at_most(
                format!("identity_{tag}_theta={}", nj.theta),
                (f - via).abs(),
                IDENTITY_TOL,
                "direct integral against the Beta product form",
            );
            report.row(vec![
                num(alpha),
                "no_jump".into(),
                num(nj.theta),
                num(nj.empirical),
                num(nj.stderr),
                num(nj.target),
                num((nj.empirical - nj.target).abs()),
            ]);
            plot.push([nj.theta, nj.empirical, nj.stderr]);
        }
        report.plot(format!("no_jump_alpha{alpha}"), plot);
        let ys: Vec<f64> = r.samples.iter().map(|s| s.y).collect();
        report.plot(format!("age_ecdf_alpha{alpha}"), super::ecdf_points(&ys, 99));
        report.plot(
            format!("age_cdf_target_alpha{alpha}"),
            (1..100)
                .map(|i| {
                    let y = i as f64 / 100.0;
                    Ok([y, incomplete_beta(1.0 - alpha, alpha, y)?, 0.0])
                })
                .collect::<Result<_>>()?,
        );
        report.estimate(
            tag,
            serde_json::json!({
                "ks_age": r.ks_age,
                "ks_mirrored": r.ks_mirrored,
                "reading": if r.ks_age <= r.ks_mirrored { "age" } else { "mirrored" },
                "mean_y": r.mean_y,
                "stderr_y": r.stderr_y,
                "resolution": r.resolution,
                "compensated": r.compensated,
                "no_jump": r.no_jump,
            }),
        );
    }
    Ok(())
}
