//! Direct trap-model simulation against the cascading construction on one
//! fixed environment.

use std::sync::Arc;

use trapcascade::aging::{ks_two_sample, ks_two_sample_critical_5pct};
use trapcascade::rng_heavy::derive_seed;
use trapcascade::bdtm::cje_sampler;
use trapcascade::{DirectSampler, Environment, Result, TrajectorySampler, VolumeSpec};

use super::{column, past, z_at};
use crate::config::SimulateConfig;
use crate::report::{num, Report};

pub fn header(levels: usize) -> Vec<String> {
    let mut h = vec!["engine".to_string(), "replica".to_string()];
    h.extend((1..=levels).map(|j| format!("z_{j}")));
    h
}

fn trajectory_csv(sampler: &dyn TrajectorySampler, t: f64) -> Result<Vec<u8>> {
    let traj = sampler.sample(0, past(t))?;
    let mut out = Vec::new();
    traj.write_csv(&mut out)
        .map_err(|e| trapcascade::Error::Unsupported(e.to_string()))?;
    Ok(out)
}

pub fn run(cfg: &SimulateConfig, seed: u64, report: &mut Report) -> Result<()> {
    let env = Arc::new(Environment::new(
        VolumeSpec::new(cfg.m.clone(), cfg.alphas.clone())?,
        derive_seed(seed, 0xe0),
    ));
    let k = env.levels();
    let direct = DirectSampler {
        env: env.clone(),
        seed: derive_seed(seed, 1),
    };
    let cje = cje_sampler(env.clone(), derive_seed(seed, 2))?;
    report.estimate("environment", serde_json::from_str::<serde_json::Value>(&env.to_json(true)).ok());

    let (zd, inv_d) = z_at(&direct, cfg.t, cfg.replicas)?;
    report.structural.add_paths(zd.len(), &inv_d);
    let (zc, inv_c) = z_at(&cje, cfg.t, cfg.replicas)?;
    report.structural.add_paths(zc.len(), &inv_c);
    for (engine, rows) in [("direct", &zd), ("cje", &zc)] {
        for (r, z) in rows.iter().enumerate() {
            let mut cells = vec![engine.to_string(), r.to_string()];
            cells.extend(z.iter().map(|v| num(*v)));
            report.row(cells);
        }
    }
    let crit = ks_two_sample_critical_5pct(zd.len(), zc.len());
    report.estimate("ks_critical_5pct", crit);
    for j in 1..=k {
        let (a, b) = (column(&zd, j), column(&zc, j));
        let d = ks_two_sample(&a, &b)?;
        report.check_at_most(
            format!("direct_vs_cje_ks_{j}"),
            d,
            cfg.ks_max,
            format!("Z_{j}({}) over {} replicas each", cfg.t, cfg.replicas),
        );
        report.estimate(format!("ks_{j}"), d);
        report.plot(format!("z{j}_direct_ecdf"), super::ecdf_points(&a, 99));
        report.plot(format!("z{j}_cje_ecdf"), super::ecdf_points(&b, 99));
    }
    if cfg.trajectory {
        report
            .attachments
            .push(("trajectory_direct.csv".into(), trajectory_csv(&direct, cfg.t)?));
        report
            .attachments
            .push(("trajectory_cje.csv".into(), trajectory_csv(&cje, cfg.t)?));
    }
    Ok(())
}
