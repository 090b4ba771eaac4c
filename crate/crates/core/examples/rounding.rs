//! Rounds a fractional solution many times and compares the rounded
//! objective with the fractional one.

use mdbgp::generate::planted_partition;
use mdbgp::metrics::uncut_edges;
use mdbgp::partition::{randomized_round, round_best_of};
use mdbgp::projection::BalanceSpec;
use mdbgp::solver::fractional_objective;
use mdbgp::{run_gd, GdConfig, WeightSpec};

fn main() -> mdbgp::Result<()> {
    let g = planted_partition(2000, 2, 0.03, 0.004, 5);
    let keep: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) > 0).collect();
    let g = g.induced_subgraph(&keep).graph;
    let ws = "unit".parse::<WeightSpec>()?.build(&g)?;
    let cfg = GdConfig { iterations: 15, fix_threshold: None, ..GdConfig::default() };
    let (sol, _) = run_gd(&g, &ws, &cfg)?;

    let trials = 2000;
    let mean = (0..trials).map(|t| uncut_edges(&g, &randomized_round(&sol.x, 1, t)) as f64).sum::<f64>() / trials as f64;
    println!("fractional objective {:.2}", fractional_objective(&g, &sol.x));
    println!("mean rounded uncut   {mean:.2} over {trials} roundings");

    let spec = BalanceSpec::new(&ws, cfg.epsilon)?;
    let best = round_best_of(&g, &sol.x, &spec, 16, 1);
    println!("best of 16: {} uncut, {:?}, trial {}", best.uncut, best.tier, best.trial);
    Ok(())
}
