//! End-to-end behaviour of the samplers.

use std::sync::Arc;

use trapcascade::bdtm::{cje_sampler, equilibrium_weights, simulate_direct, stationary_oracle};
use trapcascade::cascade::replica_stream;
use trapcascade::limits::{aging_process_sampler, k_process_sampler};
use trapcascade::{
    DirectSampler, Environment, Regime, RegimeSampler, RegimeSpec, TrajectorySampler, VolumeSpec,
};

fn env(m: Vec<usize>, seed: u64) -> Environment {
    Environment::new(VolumeSpec::new(m, vec![0.5, 0.3]).unwrap(), seed)
}

#[test]
fn equilibrium_matches_generator_solve() {
    for seed in 0..5 {
        let e = env(vec![3, 4], seed);
        let closed = equilibrium_weights(&e).unwrap();
        let oracle = stationary_oracle(&e).unwrap();
        assert!(oracle.residual < 1e-12 * oracle.q_norm.max(1.0));
        assert!(closed.max_abs_diff(&oracle.weights) < 1e-10);
        assert!((closed.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn environment_round_trips_through_json() {
    let e = env(vec![2, 3], 11);
    let back = Environment::from_json(&e.to_json(true)).unwrap();
    for leaf in e.leaves() {
        assert_eq!(e.tau(leaf.coords()), back.tau(leaf.coords()));
        assert_eq!(e.tau(&leaf.coords()[..1]), back.tau(&leaf.coords()[..1]));
    }
}

#[test]
fn direct_paths_are_reproducible_and_valid() {
    let e = env(vec![3, 3], 4);
    let a = simulate_direct(&e, 50.0, &mut replica_stream(7, 0)).unwrap();
    let b = simulate_direct(&e, 50.0, &mut replica_stream(7, 0)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.check_invariants().violations(), 0);
    let c = simulate_direct(&e, 50.0, &mut replica_stream(7, 1)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn samplers_produce_valid_paths() {
    let e = Arc::new(env(vec![3, 3], 2));
    let samplers: Vec<Box<dyn TrajectorySampler>> = vec![
        Box::new(DirectSampler { env: e.clone(), seed: 1 }),
        Box::new(cje_sampler(e, 2).unwrap()),
        Box::new(k_process_sampler(&[0.5, 0.3], 1e-4, 3).unwrap()),
        Box::new(aging_process_sampler(&[0.5, 0.3], 1e-3, 4).unwrap()),
        Box::new(RegimeSampler::new(RegimeSpec::new(vec![0.5], Regime::Ergodic { n: 50 }).unwrap(), 5).unwrap()),
    ];
    for (i, s) in samplers.iter().enumerate() {
        for r in 0..50 {
            let t = s.sample(r, 2.0).unwrap_or_else(|e| panic!("sampler {i} replica {r}: {e:?}"));
            let inv = t.check_invariants();
            assert_eq!(inv.violations(), 0, "{inv:?}");
            assert_eq!(t.levels(), s.levels());
            assert_eq!(t.segments.first().unwrap().t_start, 0.0);
            assert_eq!(t.horizon, 2.0);
            assert_eq!(s.sample(r, 2.0).unwrap(), t);
        }
    }
}

#[test]
fn window_queries_are_consistent() {
    let s = aging_process_sampler(&[0.5, 0.3], 1e-3, 8).unwrap();
    for r in 0..200 {
        let t = s.sample(r, 3.0).unwrap();
        for level in 1..=2 {
            let quiet = t.no_jump(level, 1.0, 1.0).unwrap();
            if quiet {
                assert!(t.same_state(level, 1.0, 1.0).unwrap());
                assert!(!t.novel(level, 1.0, 1.0).unwrap());
            }
        }
        // a level-1 jump is also a level-2 jump
        if t.no_jump(2, 1.0, 1.0).unwrap() {
            assert!(t.no_jump(1, 1.0, 1.0).unwrap());
        }
        let z = t.value_at(1.5).unwrap();
        assert!(z.z[0] > z.z[1]);
    }
}

#[test]
fn out_of_horizon_is_an_error() {
    let s = k_process_sampler(&[0.5], 1e-3, 1).unwrap();
    let t = s.sample(0, 1.0).unwrap();
    assert!(t.value_at(1.0).is_err());
    assert!(t.no_jump(1, 0.5, 1.0).is_err());
}
