//! Runs the fractional solver on one bisection and prints its trace as CSV.

use mdbgp::generate::planted_partition;
use mdbgp::{run_gd, GdConfig, WeightSpec};

fn main() -> mdbgp::Result<()> {
    let g = planted_partition(3000, 2, 0.02, 0.002, 2);
    let keep: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) > 0).collect();
    let g = g.induced_subgraph(&keep).graph;
    let ws = "unit,degree".parse::<WeightSpec>()?.build(&g)?;
    let (sol, trace) = run_gd(&g, &ws, &GdConfig::default())?;
    trace.write_csv(std::io::stdout().lock())?;
    eprintln!("objective {:.2} of m = {}, {} of {} fixed", sol.objective, g.m(), sol.fixed_count(), g.n());
    Ok(())
}
