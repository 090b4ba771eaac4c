//! Checks the exact and nested projections against the brute-force
//! active-set oracle on random small instances.

use mdbgp::oracle::brute_force_projection;
use mdbgp::projection::{project_k, BalanceSpec, Method, ProjectionOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> mdbgp::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = ProjectionOptions::default();
    let mut worst = [0.0f64; 2];
    let mut count = 0;
    while count < 300 {
        let n = rng.gen_range(1..=8);
        let d = rng.gen_range(1..=3);
        let rows: Vec<Vec<f64>> = (0..d).map(|_| (0..n).map(|_| 1.0 - rng.gen::<f64>()).collect()).collect();
        let totals: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
        let shifts = totals.iter().map(|t| rng.gen_range(-0.3..0.3) * t).collect();
        let spec = BalanceSpec::from_rows(rows, totals, rng.gen_range(0.0..0.2), shifts)?;
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let Ok(oracle) = brute_force_projection(&y, &spec) else { continue };
        for (slot, method) in [Method::Exact, Method::Nested].into_iter().enumerate() {
            let x = project_k(&y, &spec, method, &opts)?.x;
            let gap = x.iter().zip(&oracle.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst[slot] = worst[slot].max(gap);
        }
        count += 1;
    }
    println!("{count} instances: max |exact - oracle| = {:.2e}, max |nested - oracle| = {:.2e}", worst[0], worst[1]);
    Ok(())
}
