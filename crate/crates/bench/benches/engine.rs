use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use trapcascade::aging::f_limit;
use trapcascade::bdtm::{equilibrium_weights, simulate_direct, stationary_oracle};
use trapcascade::cascade::replica_stream;
use trapcascade::limits::{aging_process_sampler, k_process_sampler};
use trapcascade::race::run_race;
use trapcascade::rng_heavy::stable_jump_set;
use trapcascade::{
    Environment, FMethod, JumpFunction, RandomStream, Regime, RegimeSampler, RegimeSpec, StableSpec,
    TrajectorySampler, VolumeSpec,
};

fn races(c: &mut Criterion) {
    let jumps: Vec<(f64, f64)> = (1..=1000).map(|i| (i as f64, 1.0 + (i % 7) as f64)).collect();
    let base = JumpFunction::from_jumps(jumps).unwrap();
    let mut r = 0;
    c.bench_function("race_1000_jumps", |b| {
        b.iter_batched(
            || base.clone(),
            |mut s| {
                r += 1;
                run_race(&mut s, 0.01, &mut RandomStream::from_seed(r)).unwrap()
            },
            BatchSize::SmallInput,
        )
    });
}

fn subordinators(c: &mut Criterion) {
    let spec = StableSpec::new(0.5, 1e-4).unwrap();
    let stream = RandomStream::from_seed(3);
    c.bench_function("stable_jump_set_unit_interval", |b| {
        b.iter(|| stable_jump_set(spec, 0.0, black_box(1.0), &stream).unwrap())
    });
}

fn trajectories(c: &mut Criterion) {
    let env = Arc::new(Environment::new(VolumeSpec::new(vec![3, 3], vec![0.5, 0.3]).unwrap(), 1));
    let mut g = c.benchmark_group("trajectory");
    let mut r = 0;
    g.bench_function("direct_k2_t5", |b| {
        b.iter(|| {
            r += 1;
            simulate_direct(&env, 5.0, &mut replica_stream(1, r)).unwrap()
        })
    });
    let aging = aging_process_sampler(&[0.5, 0.3], 1e-4, 2).unwrap();
    g.bench_function("aging_process_k2_t3", |b| {
        b.iter(|| {
            r += 1;
            aging.sample(r, 3.0).unwrap()
        })
    });
    let k = k_process_sampler(&[0.5], 1e-4, 4).unwrap();
    g.bench_function("k_process_k1_t1", |b| {
        b.iter(|| {
            r += 1;
            k.sample(r, 1.0).unwrap()
        })
    });
    let ergodic = RegimeSampler::new(RegimeSpec::new(vec![0.5], Regime::Ergodic { n: 1000 }).unwrap(), 5).unwrap();
    g.bench_function("ergodic_n1000_t1", |b| {
        b.iter(|| {
            r += 1;
            ergodic.sample(r, 1.0).unwrap()
        })
    });
    g.finish();
}

fn oracles(c: &mut Criterion) {
    c.bench_function("f_limit_k2_quadrature", |b| {
        b.iter(|| f_limit(&[0.5, 0.3], 2, black_box(1.0), FMethod::Quadrature, 1e-8).unwrap())
    });
    let env = Environment::new(VolumeSpec::new(vec![6, 6], vec![0.5, 0.3]).unwrap(), 7);
    c.bench_function("equilibrium_closed_form_6x6", |b| b.iter(|| equilibrium_weights(&env).unwrap()));
    c.bench_function("stationary_solve_6x6", |b| b.iter(|| stationary_oracle(&env).unwrap()));
}

criterion_group!(benches, races, subordinators, trajectories, oracles);
criterion_main!(benches);
