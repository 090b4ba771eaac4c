//! Computes the available vertex weight functions on a small graph and
//! writes them as a weights file.

use mdbgp::graph::load_edge_list_str;
use mdbgp::weights::save_weights;
use mdbgp::WeightSpec;

fn main() -> mdbgp::Result<()> {
    // A star on 0 with a tail 3-4-5.
    let (g, _) = load_edge_list_str("0 1\n0 2\n0 3\n3 4\n4 5\n")?;
    let ws = "unit,degree,nbrdeg,pagerank:0.85:100".parse::<WeightSpec>()?.build(&g)?;
    for j in 0..ws.d() {
        println!("{:<18} total {:>8.4}  {:.4?}", ws.label(j), ws.total(j), ws.row(j));
    }
    println!();
    save_weights(&ws, &g, std::io::stdout().lock())?;
    Ok(())
}
