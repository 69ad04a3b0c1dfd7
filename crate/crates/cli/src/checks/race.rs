//! The exponential race on a small fixed jump function.

use rayon::prelude::*;
use trapcascade::aging::ks_distance;
use trapcascade::cascade::replica_stream;
use trapcascade::race::{race, stop_tail};
use trapcascade::{JumpFunction, RaceRun, Result};

use super::{binomial_se, pearson};
use crate::config::RaceConfig;
use crate::report::{num, Report};

pub const HEADER: &[&str] = &[
    "jump",
    "location",
    "size",
    "p_target",
    "p_empirical",
    "stderr",
    "tail_target",
    "tail_empirical",
    "stops",
    "ks_undershoot",
    "ks_overshoot",
    "corr_under_over",
];

struct Run {
    /// `None` when the race ran past the last jump.
    stop: Option<usize>,
    sojourns: Vec<f64>,
    overshoot: f64,
    total: f64,
    consistent: bool,
}

/// Stopping law straight from the product formula: survive every earlier
/// jump, then stop. The last entry is the chance of running past them all.
pub fn stop_law(sizes: &[f64], ambient: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(sizes.len() + 1);
    let mut survive = 1.0;
    for &g in sizes {
        let lambda = 1.0 / g;
        out.push(survive * ambient / (ambient + lambda));
        survive *= lambda / (ambient + lambda);
    }
    out.push(survive);
    out
}

fn one(s: &JumpFunction, ambient: f64, seed: u64, replica: u64) -> Result<Run> {
    let mut s = s.snapshot();
    let mut stream = replica_stream(seed, replica);
    Ok(match race(&mut s, ambient, &mut stream)? {
        RaceRun::Stopped(o) => {
            let sum: f64 = o.visited.iter().map(|v| v.sojourn).sum();
            let consistent = o.visited.last().map(|v| v.location) == Some(o.stop_location)
                && o.stop_index + 1 == o.visited.len()
                && o.visited.iter().all(|v| v.sojourn > 0.0)
                && o.overshoot > 0.0
                && (sum - o.total_time).abs() <= 1e-12 * o.total_time.max(1.0);
            Run {
                stop: Some(o.stop_index),
                sojourns: o.visited.iter().map(|v| v.sojourn).collect(),
                overshoot: o.overshoot,
                total: o.total_time,
                consistent,
            }
        }
        RaceRun::Escaped { visited } => {
            // the ambient clock is still running: add its memoryless residual
            let sum: f64 = visited.iter().map(|v| v.sojourn).sum();
            Run {
                stop: None,
                consistent: visited.iter().all(|v| v.sojourn > 0.0),
                sojourns: visited.iter().map(|v| v.sojourn).collect(),
                overshoot: f64::NAN,
                total: sum + stream.exp1() / ambient,
            }
        }
    })
}

pub fn run(cfg: &RaceConfig, seed: u64, report: &mut Report) -> Result<()> {
    let jumps = cfg.jumps();
    let s = JumpFunction::from_jumps(jumps.clone())?;
    let n = cfg.replicas as usize;
    let lam = cfg.ambient;
    let runs: Vec<Run> = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| one(&s, lam, seed, r))
        .collect::<Result<_>>()?;
    report.structural.races += n;
    report.structural.race_violations += runs.iter().filter(|r| !r.consistent).count();

    let law = stop_law(&cfg.sizes, lam);
    let k = jumps.len();
    let sig = cfg.sigmas;

    let totals: Vec<f64> = runs.iter().map(|r| r.total).collect();
    let ks_total = ks_distance(&totals, |x| -(-lam * x).exp_m1())?;
    report.check_at_most("total_time_ks", ks_total, cfg.ks_total_max, "total time against exponential(ambient)");
    report.estimate("ks_total_time", ks_total);
    report.plot("total_time_ecdf", super::ecdf_points(&totals, 99));

    let mut law_plot = Vec::new();
    let mut tail_empirical = 1.0;
    for (i, &(loc, size)) in jumps.iter().enumerate() {
        let stops: Vec<&Run> = runs.iter().filter(|r| r.stop == Some(i)).collect();
        let p_hat = stops.len() as f64 / n as f64;
        let se = binomial_se(law[i], n);
        report.check_at_most(
            format!("stop_law_{}", i + 1),
            (p_hat - law[i]).abs(),
            sig * se,
            format!("P(R = jump {}) = {}", i + 1, law[i]),
        );
        tail_empirical -= p_hat;
        let mut probe = s.snapshot();
        let tail = stop_tail(&mut probe, lam, loc)?;
        report.check_at_most(
            format!("stop_tail_{}", i + 1),
            (tail_empirical - tail).abs(),
            sig * binomial_se(tail, n),
            format!("P(R > {loc})"),
        );
        law_plot.push([(i + 1) as f64, p_hat, se]);

        let rate = 1.0 / size;
        let (ks_u, ks_o, corr) = if stops.len() >= 2 {
            let under: Vec<f64> = stops.iter().map(|r| r.sojourns[i]).collect();
            let over: Vec<f64> = stops.iter().map(|r| r.overshoot).collect();
            let ku = ks_distance(&under, |x| -(-(lam + rate) * x).exp_m1())?;
            let ko = ks_distance(&over, |x| -(-rate * x).exp_m1())?;
            let c = pearson(&under, &over);
            let m = stops.len() as f64;
            report.check_at_most(
                format!("undershoot_ks_{}", i + 1),
                ku,
                cfg.ks_conditional_max,
                format!("exponential({}) given R = jump {}", lam + rate, i + 1),
            );
            report.check_at_most(
                format!("overshoot_ks_{}", i + 1),
                ko,
                cfg.ks_conditional_max,
                format!("exponential({rate}) given R = jump {}", i + 1),
            );
            report.check_at_most(
                format!("under_over_corr_{}", i + 1),
                c.abs(),
                sig / m.sqrt(),
                format!("{} stops", stops.len()),
            );
            (ku, ko, c)
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        report.row(vec![
            (i + 1).to_string(),
            num(loc),
            num(size),
            num(law[i]),
            num(p_hat),
            num(se),
            num(tail),
            num(tail_empirical),
            stops.len().to_string(),
            num(ks_u),
            num(ks_o),
            num(corr),
        ]);
    }
    let escaped = runs.iter().filter(|r| r.stop.is_none()).count();
    let p_esc = escaped as f64 / n as f64;
    report.check_at_most(
        "escape",
        (p_esc - law[k]).abs(),
        sig * binomial_se(law[k], n),
        format!("P(no stop) = {}", law[k]),
    );
    report.row(vec![
        "escape".into(),
        num(f64::INFINITY),
        num(f64::NAN),
        num(law[k]),
        num(p_esc),
        num(binomial_se(law[k], n)),
        num(0.0),
        num(p_esc),
        escaped.to_string(),
        num(f64::NAN),
        num(f64::NAN),
        num(f64::NAN),
    ]);
    report.plot("stop_law", law_plot);
    report.plot(
        "stop_law_target",
        law[..k].iter().enumerate().map(|(i, &p)| [(i + 1) as f64, p, 0.0]).collect(),
    );

    // every visited sojourn against the eventual stopping jump
    let mut max_z: f64 = 0.0;
    for a in 0..k {
        let visited: Vec<&Run> = runs.iter().filter(|r| r.sojourns.len() > a).collect();
        if visited.len() < 2 {
            continue;
        }
        let soj: Vec<f64> = visited.iter().map(|r| r.sojourns[a]).collect();
        let m = visited.len() as f64;
        for b in a..=k {
            let target = if b == k { None } else { Some(b) };
            let hit: Vec<f64> = visited.iter().map(|r| f64::from(u8::from(r.stop == target))).collect();
            let c = pearson(&soj, &hit);
            max_z = max_z.max(c.abs() * m.sqrt());
            report.check_at_most(
                format!("independence_{}_{}", a + 1, if b == k { "escape".into() } else { (b + 1).to_string() }),
                c.abs(),
                sig / m.sqrt(),
                format!("corr(sojourn at jump {}, stop indicator) over {} races", a + 1, visited.len()),
            );
        }
    }
    report.estimate("independence_max_abs_z", max_z);
    report.estimate("stop_law_target", &law);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stop_law_sums_to_one() {
        let law = stop_law(&[2.0, 1.0, 0.5, 1.0, 2.0], 1.0);
        assert!((law.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((law[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((law[5] - 1.0 / 54.0).abs() < 1e-15);
        let three = stop_law(&[1.0, 1.0, 1.0], 1.0);
        assert_eq!(three[1], 0.25);
    }
}
