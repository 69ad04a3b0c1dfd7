//! Closed-form equilibrium against the generator null vector and a long
//! direct run.

use trapcascade::bdtm::{equilibrium_weights, occupation_run, stationary_oracle};
use trapcascade::rng_heavy::derive_seed;
use trapcascade::{Environment, RandomStream, Result, VolumeSpec};

use crate::config::EquilibriumConfig;
use crate::report::{num, Report};

pub const HEADER: &[&str] = &["kind", "env_seed", "leaf", "closed_form", "oracle", "occupation", "stderr", "abs_diff"];

const OCCUPATION_SALT: u64 = 0x0cc0;

fn leaf_name(coords: &[usize]) -> String {
    coords.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(":")
}

pub fn run(cfg: &EquilibriumConfig, seed: u64, report: &mut Report) -> Result<()> {
    let spec = VolumeSpec::new(cfg.m.clone(), cfg.alphas.clone())?;
    let mut worst: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    for i in 0..cfg.env_seeds {
        let env_seed = derive_seed(seed, i);
        let env = Environment::new(spec.clone(), env_seed);
        let closed = equilibrium_weights(&env)?;
        let oracle = stationary_oracle(&env)?;
        let diff = closed.max_abs_diff(&oracle.weights);
        worst = worst.max(diff);
        worst_residual = worst_residual.max(oracle.residual);
        for (leaf, (c, o)) in env.leaves().zip(closed.weights.iter().zip(&oracle.weights.weights)) {
            report.row(vec![
                "closed_form".into(),
                env_seed.to_string(),
                leaf_name(leaf.coords()),
                num(*c),
                num(*o),
                num(f64::NAN),
                num(f64::NAN),
                num((c - o).abs()),
            ]);
        }
    }
    report.check_at_most(
        "closed_form_vs_oracle",
        worst,
        cfg.max_abs_diff,
        format!("max over {} environments", cfg.env_seeds),
    );
    report.estimate("max_abs_diff", worst);
    report.estimate("max_generator_residual", worst_residual);

    if cfg.steps == 0 {
        return Ok(());
    }
    let env_seed = derive_seed(seed, 0);
    let env = Environment::new(spec, env_seed);
    let oracle = stationary_oracle(&env)?;
    let mut stream = RandomStream::from_seed(derive_seed(seed, OCCUPATION_SALT));
    let occ = occupation_run(&env, cfg.steps, cfg.batches, &mut stream)?;
    let mut worst_z: f64 = 0.0;
    let mut plot = Vec::new();
    for (idx, leaf) in env.leaves().enumerate() {
        let (f, se, o) = (occ.fractions[idx], occ.stderr[idx], oracle.weights.weights[idx]);
        let name = leaf_name(leaf.coords());
        report.check_at_most(
            format!("occupation_{name}"),
            (f - o).abs(),
            cfg.sigmas * se,
            format!("{} steps in {} batches", cfg.steps, cfg.batches),
        );
        worst_z = worst_z.max((f - o).abs() / se);
        report.row(vec![
            "occupation".into(),
            env_seed.to_string(),
            name,
            num(f64::NAN),
            num(o),
            num(f),
            num(se),
            num((f - o).abs()),
        ]);
        plot.push([idx as f64, f, se]);
    }
    report.plot("occupation", plot);
    report.plot(
        "occupation_target",
        oracle.weights.weights.iter().enumerate().map(|(i, &w)| [i as f64, w, 0.0]).collect(),
    );
    report.estimate("occupation_max_abs_z", worst_z);
    Ok(())
}
