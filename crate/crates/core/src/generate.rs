//! Seeded random and structured graphs for experiments and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;

/// Bernoulli(p) pairs `(u, v)` with `u < v` over `0..n`, by geometric skips.
fn bernoulli_pairs(n: usize, p: f64, rng: &mut ChaCha8Rng, mut keep: impl FnMut(usize, usize) -> bool, out: &mut Vec<(usize, usize)>) {
    if p <= 0.0 || n < 2 {
        return;
    }
    let log_q = (1.0 - p.min(1.0 - 1e-15)).ln();
    let (mut v, mut w): (usize, i64) = (1, -1);
    while v < n {
        let r: f64 = rng.gen();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while v < n && w >= v as i64 {
            w -= v as i64;
            v += 1;
        }
        if v < n && keep(w as usize, v) {
            out.push((w as usize, v));
        }
    }
}

/// `G(n, p)`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    bernoulli_pairs(n, p, &mut rng, |_, _| true, &mut edges);
    Graph::from_index_edges(n, &edges)
}

/// Stochastic block model with `blocks` equal blocks: vertex `v` is in
/// block `v % blocks`.
pub fn planted_partition(n: usize, blocks: usize, p_in: f64, p_out: f64, seed: u64) -> Graph {
    let blocks = blocks.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    bernoulli_pairs(n, p_in, &mut rng, |u, v| u % blocks == v % blocks, &mut edges);
    bernoulli_pairs(n, p_out, &mut rng, |u, v| u % blocks != v % blocks, &mut edges);
    Graph::from_index_edges(n, &edges)
}

/// `count` disjoint copies of `K_size`.
pub fn disjoint_cliques(count: usize, size: usize) -> Graph {
    let mut edges = Vec::new();
    for c in 0..count {
        let base = c * size;
        for u in 0..size {
            for v in u + 1..size {
                edges.push((base + u, base + v));
            }
        }
    }
    Graph::from_index_edges(count * size, &edges)
}

/// Two copies of `K_size` joined by the edge `(size-1, size)`.
pub fn dumbbell(size: usize) -> Graph {
    let g = disjoint_cliques(2, size);
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    edges.push((size - 1, size));
    Graph::from_index_edges(2 * size, &edges)
}
