//! Projects one random point onto a two-dimensional balance region with
//! every method and compares distance, feasibility and runtime.

use std::time::Instant;

use mdbgp::projection::{project_k, BalanceSpec, Method, ProjectionOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> mdbgp::Result<()> {
    let n = 50_000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.5)).collect();
    let rows: Vec<Vec<f64>> = (0..2).map(|_| (0..n).map(|_| 1.0 - rng.gen::<f64>()).collect()).collect();
    let totals = rows.iter().map(|r| r.iter().sum()).collect();
    let spec = BalanceSpec::from_rows(rows, totals, 0.05, vec![0.0, 0.0])?;
    let opts = ProjectionOptions::default();

    let exact = project_k(&y, &spec, Method::Exact, &opts)?;
    println!("{:<22} {:>12} {:>12} {:>10} {:>8}", "method", "|x - y|", "|x - exact|", "violation", "ms");
    for method in [Method::Exact, Method::Nested, Method::Dykstra, Method::Alternating, Method::AlternatingOneShot] {
        let start = Instant::now();
        let r = project_k(&y, &spec, method, &opts)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        println!(
            "{:<22} {:>12.6} {:>12.2e} {:>10.2e} {:>8.2}",
            method.name(),
            dist(&r.x, &y),
            dist(&r.x, &exact.x),
            spec.max_violation(&r.x),
            ms
        );
    }
    Ok(())
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}
