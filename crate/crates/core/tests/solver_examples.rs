use mdbgp::generate::{disjoint_cliques, dumbbell, erdos_renyi};
use mdbgp::metrics::{cut_size, edge_locality, imbalance, uncut_edges};
use mdbgp::partition::{hash_partition, recursive_partition, round_best_of, BalanceTier, PartitionConfig};
use mdbgp::projection::BalanceSpec;
use mdbgp::solver::{fractional_objective, run_gd, GdConfig};
use mdbgp::weights::{unit_weights, WeightSet, WeightSpec};
use mdbgp::Graph;
use proptest::prelude::*;

fn unit(n: usize) -> WeightSet {
    let mut ws = WeightSet::new(n);
    ws.push("unit", unit_weights(n).unwrap()).unwrap();
    ws
}

#[test]
fn two_triangles_reach_zero_cut() {
    let g = disjoint_cliques(2, 3);
    let ws = unit(6);
    let spec = BalanceSpec::new(&ws, 0.0).unwrap();
    let mut good = 0;
    for seed in 0..20 {
        let cfg = GdConfig { epsilon: 0.0, seed, ..GdConfig::default() };
        let (sol, _) = run_gd(&g, &ws, &cfg).unwrap();
        let r = round_best_of(&g, &sol.x, &spec, 8, seed);
        if sol.objective >= 5.5 && cut_size(&g, &r.partition) == 0 && r.tier == BalanceTier::Strict {
            good += 1;
        }
    }
    assert!(good >= 18, "{good}/20 seeds");
}

#[test]
fn dumbbell_best_of_five() {
    let g = dumbbell(4);
    let ws = "unit,degree".parse::<WeightSpec>().unwrap().build(&g).unwrap();
    let best = (0..5)
        .map(|seed| {
            let cfg = PartitionConfig { gd: GdConfig { epsilon: 0.1, seed, ..GdConfig::default() }, ..PartitionConfig::default() };
            edge_locality(&g, &recursive_partition(&g, &ws, &cfg).unwrap().partition)
        })
        .fold(0.0, f64::max);
    assert_eq!(best, 12.0 / 13.0);
}

#[test]
fn dumbbell_rounding_tracks_fractional_objective() {
    let g = dumbbell(4);
    let ws = "unit,degree".parse::<WeightSpec>().unwrap().build(&g).unwrap();
    let spec = BalanceSpec::new(&ws, 0.1).unwrap();
    let (sol, _) = run_gd(&g, &ws, &GdConfig { epsilon: 0.1, ..GdConfig::default() }).unwrap();
    let r = round_best_of(&g, &sol.x, &spec, 32, 0);
    assert!((r.uncut as f64 - fractional_objective(&g, &sol.x)).abs() <= 1.0 + 1e-9);
}

#[test]
fn four_cliques_four_parts() {
    let g = disjoint_cliques(4, 5);
    let ws = unit(20);
    let best = (0..5)
        .map(|seed| {
            let cfg = PartitionConfig { k: 4, gd: GdConfig { seed, ..GdConfig::default() }, ..PartitionConfig::default() };
            let p = recursive_partition(&g, &ws, &cfg).unwrap().partition;
            assert_eq!(p.part_sizes(), vec![5; 4]);
            edge_locality(&g, &p)
        })
        .fold(0.0, f64::max);
    assert_eq!(best, 1.0);
}

#[test]
fn single_part_is_trivial() {
    let g = erdos_renyi(200, 0.05, 3);
    let ws = unit(200);
    let cfg = PartitionConfig { k: 1, ..PartitionConfig::default() };
    let p = recursive_partition(&g, &ws, &cfg).unwrap().partition;
    assert!(p.assignment().iter().all(|&a| a == 0));
    assert_eq!(edge_locality(&g, &p), 1.0);
    assert_eq!(cut_size(&g, &p), 0);
}

#[test]
fn general_k_is_balanced() {
    let g = erdos_renyi(600, 0.02, 8);
    let ws = "unit,degree".parse::<WeightSpec>().unwrap().build(&g).unwrap();
    let cfg = PartitionConfig { k: 3, ..PartitionConfig::default() };
    let out = recursive_partition(&g, &ws, &cfg).unwrap();
    assert_eq!(out.bisections.len(), 2);
    assert!(imbalance(&ws, &out.partition).iter().all(|&v| v <= 0.12), "{:?}", imbalance(&ws, &out.partition));
}

#[test]
fn edgeless_graph_rounds_balanced() {
    let g = Graph::from_index_edges(40, &[]);
    let ws = unit(40);
    let out = recursive_partition(&g, &ws, &PartitionConfig::default()).unwrap();
    assert!(imbalance(&ws, &out.partition)[0] <= 0.05 + 1e-12, "{:?}", out.partition.part_sizes());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cut_and_uncut_sum_to_m(n in 1usize..60, p in 0.0f64..0.3, seed in any::<u64>(), k in 1usize..5) {
        let g = erdos_renyi(n, p, seed);
        let part = hash_partition(&g, k.min(n), seed).unwrap();
        prop_assert_eq!(cut_size(&g, &part) + uncut_edges(&g, &part), g.m());
        let loc = edge_locality(&g, &part);
        prop_assert!((0.0..=1.0).contains(&loc));
    }

    #[test]
    fn imbalance_nonnegative(n in 2usize..60, seed in any::<u64>(), k in 1usize..5) {
        let g = erdos_renyi(n, 0.1, seed);
        let part = hash_partition(&g, k.min(n), seed).unwrap();
        prop_assert!(imbalance(&unit(n), &part).iter().all(|&v| v >= 0.0));
    }
}
