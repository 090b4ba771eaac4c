//! Exhaustive reference solvers for small instances.
//!
//! They share nothing with the production algorithms beyond the problem
//! definitions and are meant for cross-checking in tests.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;
use crate::projection::BalanceSpec;
use crate::weights::WeightSet;

/// A KKT point: `y - x = Σᵢ μᵢ xᵢ eᵢ + Σⱼ λⱼ wʲ` with `μ ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleProjection {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

const KKT_TOL: f64 = 1e-9;

/// Solves `a·z = b` in place by Gaussian elimination with full pivoting.
/// Returns `None` for (numerically) singular systems.
fn solve_full_pivot(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut cols: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pr, mut pc, mut best) = (k, k, 0.0);
        for (r, row) in a.iter().enumerate().skip(k) {
            for (c, &v) in row.iter().enumerate().skip(k) {
                if v.abs() > best {
                    (pr, pc, best) = (r, c, v.abs());
                }
            }
        }
        if best <= 1e-12 * scale {
            return None;
        }
        a.swap(k, pr);
        b.swap(k, pr);
        if pc != k {
            for row in a.iter_mut() {
                row.swap(k, pc);
            }
            cols.swap(k, pc);
        }
        for r in k + 1..n {
            let f = a[r][k] / a[k][k];
            if f != 0.0 {
                for c in k..n {
                    a[r][c] -= f * a[k][c];
                }
                b[r] -= f * b[k];
            }
        }
    }
    let mut z = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|c| a[k][c] * z[c]).sum();
        z[k] = (b[k] - s) / a[k][k];
    }
    let mut out = vec![0.0; n];
    for (k, &c) in cols.iter().enumerate() {
        out[c] = z[k];
    }
    Some(out)
}

fn digits(mut code: usize, len: usize) -> Vec<i8> {
    (0..len)
        .map(|_| {
            let d = match code % 3 {
                0 => 0,
                1 => 1,
                _ => -1,
            };
            code /= 3;
            d
        })
        .collect()
}

/// Projection of `y` onto `K` by trying every box pattern and every slab
/// face pattern. Limited to `n ≤ 10`, `d ≤ 3`.
pub fn brute_force_projection(y: &[f64], spec: &BalanceSpec) -> Result<OracleProjection> {
    let n = y.len();
    let d = spec.d();
    if n > 10 || d > 3 {
        return Err(Error::Invalid(format!("oracle limited to n ≤ 10, d ≤ 3 (got n={n}, d={d})")));
    }
    if d > 0 && spec.n() != n {
        return Err(Error::Invalid("point and weights differ in length".into()));
    }
    let mut best: Option<(f64, OracleProjection)> = None;
    for box_code in 0..3usize.pow(n as u32) {
        // 0 free, 1 at +1, -1 at -1.
        let bx = digits(box_code, n);
        for slab_code in 0..3usize.pow(d as u32) {
            let faces = digits(slab_code, d);
            if (0..d).any(|j| faces[j] == -1 && spec.half_width(j) == 0.0) {
                continue;
            }
            if let Some(c) = candidate(y, spec, &bx, &faces) {
                let dist: f64 = c.x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                if best.as_ref().is_none_or(|(bd, _)| dist < *bd) {
                    best = Some((dist, c));
                }
            }
        }
    }
    best.map(|(_, c)| c)
        .ok_or_else(|| Error::Infeasible("no KKT point: the feasible set is empty".into()))
}

fn candidate(y: &[f64], spec: &BalanceSpec, bx: &[i8], faces: &[i8]) -> Option<OracleProjection> {
    let n = y.len();
    let d = spec.d();
    let free: Vec<usize> = (0..n).filter(|&i| bx[i] == 0).collect();
    let active: Vec<usize> = (0..d).filter(|&j| faces[j] != 0).collect();
    let (nf, na) = (free.len(), active.len());
    // Unknowns: x_free then λ_active.
    let size = nf + na;
    let mut a = vec![vec![0.0; size]; size];
    let mut b = vec![0.0; size];
    for (r, &i) in free.iter().enumerate() {
        a[r][r] = 1.0;
        for (c, &j) in active.iter().enumerate() {
            a[r][nf + c] = spec.row(j)[i];
        }
        b[r] = y[i];
    }
    for (r, &j) in active.iter().enumerate() {
        let w = spec.row(j);
        for (c, &i) in free.iter().enumerate() {
            a[nf + r][c] = w[i];
        }
        let fixed: f64 = (0..n).filter(|&i| bx[i] != 0).map(|i| w[i] * bx[i] as f64).sum();
        b[nf + r] = spec.shift(j) + faces[j] as f64 * spec.half_width(j) - fixed;
    }
    let z = if size == 0 { Vec::new() } else { solve_full_pivot(&mut a, &mut b)? };

    let mut x: Vec<f64> = bx.iter().map(|&s| s as f64).collect();
    for (r, &i) in free.iter().enumerate() {
        x[i] = z[r];
        if x[i].abs() > 1.0 + KKT_TOL {
            return None;
        }
    }
    let mut lambda = vec![0.0; d];
    for (c, &j) in active.iter().enumerate() {
        lambda[j] = z[nf + c];
        // An upper face pulls down (λ ≥ 0), a lower face pushes up.
        if spec.half_width(j) > 0.0 && faces[j] as f64 * lambda[j] < -KKT_TOL * (1.0 + lambda[j].abs()) {
            return None;
        }
    }
    for j in 0..d {
        let slack = KKT_TOL * spec.total(j);
        if spec.residual(&x, j).abs() > spec.half_width(j) + slack {
            return None;
        }
    }
    let mut mu = vec![0.0; n];
    for i in 0..n {
        if bx[i] != 0 {
            let pull: f64 = (0..d).map(|j| lambda[j] * spec.row(j)[i]).sum();
            mu[i] = (y[i] - x[i] - pull) * x[i];
            if mu[i] < -KKT_TOL * (1.0 + y[i].abs()) {
                return None;
            }
        }
    }
    Some(OracleProjection { x, lambda, mu })
}

/// Exhaustive 2-way partitioning for `n ≤ 20`: the ε-balanced assignment
/// with the most uncut edges, the lexicographically smallest on ties.
pub fn brute_force_partition(g: &Graph, ws: &WeightSet, epsilon: f64) -> Result<(Partition, usize)> {
    let n = g.n();
    if n > 20 {
        return Err(Error::Invalid(format!("oracle limited to n ≤ 20 (got {n})")));
    }
    if ws.n() != n {
        return Err(Error::Invalid("weights and graph differ in size".into()));
    }
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let mut best: Option<(u32, usize)> = None;
    for mask in 0u32..(1u32 << n) {
        // Vertex 0 is the most significant position, so masks run in
        // lexicographic order of the assignment.
        let part = |v: usize| (mask >> (n - 1 - v)) & 1;
        let balanced = (0..ws.d()).all(|j| {
            let s: f64 = ws
                .row(j)
                .iter()
                .enumerate()
                .map(|(v, &w)| if part(v) == 0 { w } else { -w })
                .sum();
            s.abs() <= epsilon * ws.total(j) * (1.0 + 1e-12) + 1e-12 * ws.total(j)
        });
        if !balanced {
            continue;
        }
        let uncut = edges.iter().filter(|&&(u, v)| part(u) == part(v)).count();
        if best.is_none_or(|(_, b)| uncut > b) {
            best = Some((mask, uncut));
        }
    }
    let (mask, uncut) = best.ok_or_else(|| Error::Infeasible(format!("no {epsilon}-balanced bisection exists")))?;
    let assignment = (0..n).map(|v| (mask >> (n - 1 - v)) & 1).collect();
    Ok((Partition::new(2, assignment)?, uncut))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(rows: Vec<Vec<f64>>, eps: f64) -> BalanceSpec {
        let totals = rows.iter().map(|r| r.iter().sum()).collect();
        let d = rows.len();
        BalanceSpec::from_rows(rows, totals, eps, vec![0.0; d]).unwrap()
    }

    fn units(n: usize) -> WeightSet {
        let mut ws = WeightSet::new(n);
        ws.push("unit", vec![1.0; n]).unwrap();
        ws
    }

    #[test]
    fn scalar_projection() {
        let r = brute_force_projection(&[2.0], &spec(vec![vec![1.0]], 0.5)).unwrap();
        assert!((r.x[0] - 0.5).abs() < 1e-12);
        assert!((r.lambda[0] - 1.5).abs() < 1e-12);
        assert_eq!(r.mu, vec![0.0]);
    }

    #[test]
    fn interior_point() {
        let y = [0.1, -0.2, 0.05];
        let r = brute_force_projection(&y, &spec(vec![vec![1.0; 3]], 0.5)).unwrap();
        assert_eq!(r.x, y.to_vec());
        assert_eq!(r.lambda, vec![0.0]);
        assert!(r.mu.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn stationarity_holds() {
        let s = spec(vec![vec![1.0, 2.0, 0.5], vec![0.3, 0.4, 1.0]], 0.05);
        let y = [3.0, -0.4, 1.2];
        let r = brute_force_projection(&y, &s).unwrap();
        for i in 0..3 {
            let rhs = r.mu[i] * r.x[i] + r.lambda[0] * s.row(0)[i] + r.lambda[1] * s.row(1)[i];
            assert!((y[i] - r.x[i] - rhs).abs() < 1e-8);
        }
    }

    #[test]
    fn two_triangles() {
        let g = Graph::from_index_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        let (p, uncut) = brute_force_partition(&g, &units(6), 0.0).unwrap();
        assert_eq!(uncut, 6);
        assert_eq!(p.assignment(), &[0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn path_of_four() {
        let g = Graph::from_index_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let (p, uncut) = brute_force_partition(&g, &units(4), 0.0).unwrap();
        assert_eq!(uncut, 2);
        assert_eq!(p.assignment(), &[0, 0, 1, 1]);
    }

    #[test]
    fn odd_count_is_infeasible() {
        let g = Graph::from_index_edges(3, &[(0, 1), (1, 2)]);
        assert!(brute_force_partition(&g, &units(3), 0.0).unwrap_err().is_infeasible());
    }
}
