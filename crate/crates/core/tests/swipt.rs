mod common;

use common::swipt_instance;
use irs_core::channel::Direction;
use irs_core::codebook::{
    generate_codebook, nested_grid, partition_tiles, precompute_tile_channels, select_effective_channel,
    EffectiveTileChannels, ModeSelection,
};
use irs_core::linalg::{fro2, CMat};
use irs_core::optim::{branch_and_bound, full_tree_nodes, BnbOptions, SelectionProblem};
use irs_core::parallel::Execution;
use irs_core::scenarios::{
    harvested_power, link_metrics, solve_swipt, IrsConfiguration, SwiptMethod, SwiptOptions, SwiptScenario,
    SwiptSelection,
};

const NOISE: f64 = 1e-10;

fn scenario(gamma_db: f64) -> SwiptScenario {
    SwiptScenario {
        info_receivers: vec![0, 1],
        sinr_targets: vec![10f64.powf(gamma_db / 10.0); 2],
        energy_receivers: vec![2, 3],
        min_harvested: 1e-8,
        efficiency: 0.8,
    }
}

fn tiles(seed: u64, n: usize, m: usize) -> EffectiveTileChannels {
    let inst = swipt_instance(seed, 6);
    let g = &inst.geometry;
    let irs = &g.irs[0];
    let sub = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let aoa = Direction::from_vector(sub(g.tx.position, irs.position)).unwrap();
    let center = Direction::from_vector(sub([45.0, 0.0, 1.5], irs.position)).unwrap();
    let part = partition_tiles(irs.element_count(), n).unwrap();
    let grid = nested_grid(m, center, 0.6).unwrap();
    let cb = generate_codebook(&part, &irs.layout.offsets(), m, 0.5, aoa, &grid).unwrap();
    precompute_tile_channels(&inst.cs, &part, &cb, Execution::Sequential).unwrap()
}

fn check_constraints(sc: &SwiptScenario, h: &[CMat], w: &CMat) {
    let info: Vec<CMat> = sc.info_receivers.iter().map(|&r| h[r].clone()).collect();
    let m = link_metrics(&info, w, &CMat::zeros(w.nrows(), 0), NOISE).unwrap();
    for (s, g) in m.sinr.iter().zip(&sc.sinr_targets) {
        assert!(*s >= g * (1.0 - 1e-6), "{s} < {g}");
    }
    for &e in &sc.energy_receivers {
        let p = harvested_power(&h[e], w, &CMat::zeros(w.nrows(), 0), sc.efficiency).unwrap();
        assert!(p >= sc.min_harvested * (1.0 - 1e-6), "{p}");
    }
}

#[test]
fn exhaustive_matches_brute_force_and_meets_qos() {
    let tc = tiles(1, 2, 2);
    let sc = scenario(10.0);
    let opts = SwiptOptions::default();
    let s = solve_swipt(&sc, &tc, NOISE, SwiptMethod::Exhaustive, 1, &opts).unwrap();
    let p = SwiptSelection::new(&sc, &tc, NOISE, &opts).unwrap();
    let mut best = (f64::INFINITY, ModeSelection(vec![]));
    for a in 0..2 {
        for b in 0..2 {
            let sel = ModeSelection(vec![a, b]);
            let o = p.inner_solve(&sel).unwrap();
            if o.feasible && o.objective < best.0 {
                best = (o.objective, sel);
            }
        }
    }
    assert_eq!(s.objective, best.0);
    assert_eq!(s.irs, IrsConfiguration::Tiles(best.1.clone()));
    assert!((fro2(&s.w) - s.objective).abs() <= 1e-12 * s.objective);
    check_constraints(&sc, &select_effective_channel(&tc, &best.1).unwrap(), &s.w);
}

#[test]
fn baselines_never_beat_the_optimum() {
    let opts = SwiptOptions::default();
    for seed in 0..3 {
        let tc = tiles(seed, 2, 4);
        let sc = scenario(5.0);
        let opt = solve_swipt(&sc, &tc, NOISE, SwiptMethod::Exhaustive, seed, &opts)
            .unwrap()
            .objective;
        let bnb = solve_swipt(&sc, &tc, NOISE, SwiptMethod::Bnb, seed, &opts)
            .unwrap()
            .objective;
        assert!((bnb - opt).abs() <= 1e-6 * opt);
        for m in [SwiptMethod::Random, SwiptMethod::Penalty] {
            let s = solve_swipt(&sc, &tc, NOISE, m, seed, &opts).unwrap();
            assert!(s.objective >= opt, "{m:?}");
        }
        let none = solve_swipt(&sc, &tc, NOISE, SwiptMethod::None, seed, &opts).unwrap();
        assert_eq!(none.irs, IrsConfiguration::None);
        check_constraints(&sc, &tc.direct, &none.w);
    }
}

#[test]
fn nested_codebook_never_costs_power() {
    let opts = SwiptOptions::default();
    let sc = scenario(10.0);
    let big = tiles(7, 2, 4);
    let small = big.truncated(2).unwrap();
    let p4 = solve_swipt(&sc, &big, NOISE, SwiptMethod::Exhaustive, 7, &opts)
        .unwrap()
        .objective;
    let p2 = solve_swipt(&sc, &small, NOISE, SwiptMethod::Exhaustive, 7, &opts)
        .unwrap()
        .objective;
    assert!(p4 <= p2);
}

#[test]
fn channel_gain_bound_is_valid_and_prunes() {
    let opts = SwiptOptions::default();
    let tc = tiles(3, 3, 3);
    let sc = scenario(10.0);
    let p = SwiptSelection::new(&sc, &tc, NOISE, &opts).unwrap();
    let r = branch_and_bound(&p, &|x: &[usize]| p.bound(x), &BnbOptions::default()).unwrap();
    assert!((r.nodes as u128) <= full_tree_nodes(3, 3));
    assert!(r.objective() <= r.first_leaf_objective);
    for a in 0..3 {
        let b = p.bound(&[a]);
        for rest in 0..9 {
            let o = p.inner_solve(&ModeSelection(vec![a, rest / 3, rest % 3])).unwrap();
            assert!(b <= o.objective);
        }
    }
}

#[test]
fn zero_channels_are_infeasible() {
    let mut tc = tiles(0, 2, 2);
    for d in tc.direct.iter_mut() {
        d.fill(num_complex::Complex64::new(0.0, 0.0));
    }
    let s = solve_swipt(
        &scenario(40.0),
        &tc,
        NOISE,
        SwiptMethod::None,
        0,
        &SwiptOptions::default(),
    )
    .unwrap();
    assert!(!s.feasible);
    assert_eq!(s.objective, f64::INFINITY);
}
