//! Partitions an edge list file into `k` parts and prints the metrics.
//!
//! ```text
//! cargo run --release --example partition_edge_list -- graph.txt 8
//! ```
//!
//! Without arguments a planted 4-block graph is used.

use std::fs::File;
use std::io::BufReader;

use mdbgp::generate::planted_partition;
use mdbgp::graph::load_edge_list;
use mdbgp::{recursive_partition, MetricsReport, PartitionConfig, WeightSpec};

fn main() -> mdbgp::Result<()> {
    let mut args = std::env::args().skip(1);
    let g = match args.next() {
        Some(path) => load_edge_list(BufReader::new(File::open(&path)?), &path)?.0,
        None => planted_partition(4000, 4, 0.02, 0.001, 1),
    };
    let k: usize = args.next().map_or(4, |s| s.parse().expect("k"));

    let keep: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) > 0).collect();
    let g = g.induced_subgraph(&keep).graph;
    let ws = "unit,degree".parse::<WeightSpec>()?.build(&g)?;

    let cfg = PartitionConfig { k, ..PartitionConfig::default() };
    let out = recursive_partition(&g, &ws, &cfg)?;
    println!("n = {}, m = {}, k = {k}, {} bisections", g.n(), g.m(), out.bisections.len());
    println!("{}", MetricsReport::compute(&g, &ws, &out.partition).to_json());
    Ok(())
}
