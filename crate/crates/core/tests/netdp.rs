use codesign::instances::{complete_graph, random_topology};
use codesign::model::NetworkTopology;
use codesign::netdp::{
    brute_force_points, brute_force_policies, distributed_dp, envelope_at, evaluate_policy, solve_constrained,
    solve_weighted_sum, Action, PolicyFile,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn single_link() -> NetworkTopology {
    NetworkTopology::line(2, 0.2, 10.0).unwrap()
}

#[test]
fn single_link_retransmissions() {
    let topo = single_link();
    let (_, pi) = solve_weighted_sum(&topo, 0, 1, 0.0).unwrap();
    assert!((pi.reliability - 0.8).abs() < 1e-15 && pi.energy == 1.0);
    let (_, pi) = solve_weighted_sum(&topo, 0, 2, 0.0).unwrap();
    assert!((pi.reliability - 0.96).abs() < 1e-15 && (pi.energy - 1.2).abs() < 1e-15);

    // (0, 0), (1, 0.8) and (1.2, 0.96) are collinear, so the breakpoint
    // mixes the two outer policies.
    let mix = solve_constrained(&topo, 0, 2, 1.1).unwrap();
    assert!((mix.reliability - 0.88).abs() < 1e-12, "{mix:?}");
    assert!((mix.expected_cost() - 1.1).abs() < 1e-12);
    assert_eq!(mix.pi1.energy, 0.0);
    assert!((mix.pi2.energy - 1.2).abs() < 1e-15);
    assert!((mix.theta2 - 11.0 / 12.0).abs() < 1e-12);
}

#[test]
fn weighted_sum_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..60 {
        let nodes = rng.random_range(2..=4);
        let topo = random_topology(&mut rng, nodes, 0.7);
        let d = rng.random_range(0..=4);
        let delta = 0.05 * rng.random_range(0..=20) as f64;
        let source = topo.source();
        let (table, pi) = solve_weighted_sum(&topo, source, d, delta).unwrap();
        let best = brute_force_points(&topo, source, d)
            .unwrap()
            .iter()
            .map(|p| p.rho - delta * p.cost)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((table.u_star[source][0] - best).abs() < 1e-12, "case {case}");
        assert!((pi.reliability - delta * pi.energy - best).abs() < 1e-12);
        let (rho, cost) = evaluate_policy(&topo, &pi, source, d).unwrap();
        assert!((rho - pi.reliability).abs() < 1e-12 && (cost - pi.energy).abs() < 1e-12);
    }
}

#[test]
fn constrained_optimum_lies_on_the_envelope() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..60 {
        let nodes = rng.random_range(2..=4);
        let topo = random_topology(&mut rng, nodes, 0.7);
        let d = rng.random_range(1..=4);
        let source = topo.source();
        let frontier = brute_force_policies(&topo, source, d).unwrap();
        let c_max = frontier.last().unwrap().cost;
        let c_req = rng.random_range(0.0..c_max * 1.2 + 0.1);
        let pi = solve_constrained(&topo, source, d, c_req).unwrap();
        assert!((pi.reliability - envelope_at(&frontier, c_req)).abs() < 1e-9, "case {case}");
        let unconstrained = solve_weighted_sum(&topo, source, d, 0.0).unwrap().1.energy;
        assert!((pi.expected_cost() - c_req.min(unconstrained)).abs() < 1e-9, "case {case}");
        assert!((pi.theta1 + pi.theta2 - 1.0).abs() < 1e-15);
    }
}

#[test]
fn distributed_run_equals_centralized_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let nodes = rng.random_range(2..=8);
        let topo = random_topology(&mut rng, nodes, 0.5);
        let d = rng.random_range(0..=8);
        let delta = rng.random_range(0.0..0.5);
        let run = distributed_dp(&topo, d, delta).unwrap();
        let (table, pi) = solve_weighted_sum(&topo, topo.source(), d, delta).unwrap();
        assert_eq!(run.table, table);
        assert_eq!(run.actions, pi.actions);
    }
}

#[test]
fn prohibitive_weight_holds_everywhere() {
    let topo = complete_graph(4, 0.3);
    for delta in [1.0, 1.5] {
        let (_, pi) = solve_weighted_sum(&topo, 0, 3, delta).unwrap();
        assert_eq!(pi.energy, 0.0);
        assert_eq!(pi.reliability, 0.0);
        assert!(pi.actions.iter().flatten().all(|a| *a == Action::Hold));
    }
}

#[test]
fn reliability_is_monotone_in_the_deadline() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let topo = random_topology(&mut rng, 6, 0.4);
        let mut last = 0.0;
        for d in 0..12 {
            let (_, pi) = solve_weighted_sum(&topo, topo.source(), d, 0.0).unwrap();
            assert!(pi.reliability >= last - 1e-15);
            last = pi.reliability;
        }
    }
}

#[test]
fn policy_file_survives_disk_round_trip() {
    let topo = NetworkTopology::line(4, 0.25, 10.0).unwrap();
    let pi = solve_constrained(&topo, 0, 5, 3.4).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("policy.json");
    std::fs::write(&path, PolicyFile::from_policy(&pi, 0).to_json_string()).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let back = PolicyFile::from_json_str(&text).unwrap();
    assert_eq!(back.source, 1);
    assert_eq!(back.to_policy(&topo).unwrap(), pi);
}

#[test]
fn rejects_invalid_requests() {
    let topo = single_link();
    assert!(solve_constrained(&topo, 0, 2, -1.0).is_err());
    assert!(solve_weighted_sum(&topo, 0, 2, -0.1).is_err());
    assert!(brute_force_policies(&complete_graph(5, 0.1), 0, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reliability_is_monotone_in_the_budget(seed in 0u64..1000, lo in 0.0f64..3.0, extra in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topo = random_topology(&mut rng, 5, 0.6);
        let a = solve_constrained(&topo, topo.source(), 5, lo).unwrap();
        let b = solve_constrained(&topo, topo.source(), 5, lo + extra).unwrap();
        prop_assert!(b.reliability >= a.reliability - 1e-9);
        prop_assert!(a.expected_cost() <= lo + 1e-9);
    }

    #[test]
    fn utility_is_nonincreasing_in_weight(seed in 0u64..1000, d1 in 0.0f64..1.0, d2 in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topo = random_topology(&mut rng, 5, 0.6);
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let (_, p_lo) = solve_weighted_sum(&topo, topo.source(), 4, lo).unwrap();
        let (_, p_hi) = solve_weighted_sum(&topo, topo.source(), 4, hi).unwrap();
        prop_assert!(p_hi.energy <= p_lo.energy + 1e-12);
        prop_assert!(p_hi.reliability <= p_lo.reliability + 1e-12);
    }
}
