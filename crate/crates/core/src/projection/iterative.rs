//! Projections built from the simple projections onto planes, slabs and the box.

use super::{project_box_in_place, project_hyperplane_in_place, BalanceSpec, Method, ProjectionResult};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlternatingMode {
    /// A single round.
    OneShot,
    /// Rounds until the iterate stops moving and lies in `K`.
    ToConvergence,
}

fn displacement(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Alternates between the slab centre planes `⟨wʲ, x⟩ = bⱼ` and the box.
pub fn alternating_projection(
    y: &[f64],
    spec: &BalanceSpec,
    mode: AlternatingMode,
    tol: f64,
    max_rounds: usize,
) -> Result<ProjectionResult> {
    let method = match mode {
        AlternatingMode::OneShot => Method::AlternatingOneShot,
        AlternatingMode::ToConvergence => Method::Alternating,
    };
    let mut x = y.to_vec();
    let round = |x: &mut [f64]| {
        if !x.is_empty() {
            for j in 0..spec.d() {
                project_hyperplane_in_place(x, spec.row(j), spec.shift(j), spec.row_norm_sq(j));
            }
        }
        project_box_in_place(x);
    };
    if mode == AlternatingMode::OneShot {
        round(&mut x);
        return Ok(ProjectionResult {
            x,
            lambda: Vec::new(),
            method,
            iterations: 1,
        });
    }
    let limit = tol * (x.len() as f64).sqrt();
    let mut prev = x.clone();
    for rounds in 1..=max_rounds.max(1) {
        prev.copy_from_slice(&x);
        round(&mut x);
        if displacement(&prev, &x) <= limit && spec.contains(&x, tol) {
            return Ok(ProjectionResult {
                x,
                lambda: Vec::new(),
                method,
                iterations: rounds,
            });
        }
    }
    Err(Error::NonConvergence {
        rounds: max_rounds,
        residual: spec.max_violation(&x),
        last: x,
    })
}

/// Dykstra's method over the slabs followed by the box. Converges to the
/// Euclidean projection onto `K`; the reported multipliers are the slab
/// correction coefficients.
pub fn dykstra_projection(y: &[f64], spec: &BalanceSpec, tol: f64, max_rounds: usize) -> Result<ProjectionResult> {
    let n = y.len();
    let d = spec.d();
    let mut x = y.to_vec();
    // Slab corrections are multiples of their normals.
    let mut q = vec![0.0; d];
    let mut p_box = vec![0.0; n];
    let mut prev = x.clone();
    let limit = tol * (n as f64).sqrt();
    if n == 0 {
        return Ok(ProjectionResult {
            x,
            lambda: q,
            method: Method::Dykstra,
            iterations: 0,
        });
    }
    for rounds in 1..=max_rounds.max(1) {
        prev.copy_from_slice(&x);
        for j in 0..d {
            let w = spec.row(j);
            let norm = spec.row_norm_sq(j);
            let r = super::dot(w, &x) + q[j] * norm - spec.shift(j);
            let hw = spec.half_width(j);
            let t = if r > hw {
                (r - hw) / norm
            } else if r < -hw {
                (r + hw) / norm
            } else {
                0.0
            };
            let step = q[j] - t;
            if step != 0.0 {
                x.iter_mut().zip(w).for_each(|(xi, wi)| *xi += step * wi);
            }
            q[j] = t;
        }
        for (xi, pi) in x.iter_mut().zip(p_box.iter_mut()) {
            let z = *xi + *pi;
            *xi = z.clamp(-1.0, 1.0);
            *pi = z - *xi;
        }
        if displacement(&prev, &x) <= limit && spec.contains(&x, tol) {
            return Ok(ProjectionResult {
                x,
                lambda: q,
                method: Method::Dykstra,
                iterations: rounds,
            });
        }
    }
    Err(Error::NonConvergence {
        rounds: max_rounds,
        residual: spec.max_violation(&x),
        last: x,
    })
}
