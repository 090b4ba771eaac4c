//! Times the exact two-constraint projection as `n` doubles.

use std::time::Instant;

use mdbgp::projection::{project_exact_2d, ProjectionOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> mdbgp::Result<()> {
    let opts = ProjectionOptions::default();
    let mut last: Option<f64> = None;
    for p in 14..=21 {
        let n = 1usize << p;
        let mut rng = ChaCha8Rng::seed_from_u64(p);
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let w1: Vec<f64> = (0..n).map(|_| 1.0 - rng.gen::<f64>()).collect();
        let w2: Vec<f64> = (0..n).map(|_| 1.0 - rng.gen::<f64>()).collect();
        let c1 = 0.01 * w1.iter().sum::<f64>();
        let c2 = -0.02 * w2.iter().sum::<f64>();

        let start = Instant::now();
        let r = project_exact_2d(&y, &w1, &w2, c1, c2, &opts)?;
        let secs = start.elapsed().as_secs_f64();
        let ratio = last.map_or(String::new(), |t| format!("  x{:.2}", secs / t));
        println!("n = 2^{p:<2} {:>9.4}s  lambda = ({:+.5}, {:+.5}){ratio}", secs, r.lambda[0], r.lambda[1]);
        last = Some(secs);
    }
    Ok(())
}
