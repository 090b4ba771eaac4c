//! Compares gradient-descent partitioning with the hash baseline on a
//! planted-partition graph for several `k`.

use mdbgp::generate::planted_partition;
use mdbgp::{edge_locality, hash_partition, imbalance, recursive_partition, PartitionConfig, WeightSpec};

fn main() -> mdbgp::Result<()> {
    let g = planted_partition(8000, 8, 0.01, 0.0005, 4);
    let keep: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) > 0).collect();
    let g = g.induced_subgraph(&keep).graph;
    let ws = "unit,degree".parse::<WeightSpec>()?.build(&g)?;
    println!("{:>3} {:>10} {:>10} {:>12}", "k", "gd", "hash", "gd max imb");
    for k in [2, 4, 8] {
        let gd = recursive_partition(&g, &ws, &PartitionConfig { k, ..PartitionConfig::default() })?.partition;
        let hash = hash_partition(&g, k, 0)?;
        let imb = imbalance(&ws, &gd).into_iter().fold(0.0, f64::max);
        println!("{k:>3} {:>10.4} {:>10.4} {:>12.4}", edge_locality(&g, &gd), edge_locality(&g, &hash), imb);
    }
    Ok(())
}
