//! Euclidean projection onto `K = B∞ ∩ ⋂ⱼ Sʲ`, where `B∞ = [-1,1]ⁿ` and
//! `Sʲ = { x : |⟨wʲ, x⟩ - bⱼ| ≤ ε·Wⱼ }`.
//!
//! The exact methods rely on the KKT structure of the problem: the optimum
//! has the form `xᵢ = clamp(yᵢ - Σⱼ λⱼ wʲᵢ)`, and once the sign of every
//! multiplier is guessed, each slab either drops out (`λⱼ = 0`) or becomes an
//! equality at one of its faces. [`project_k`] enumerates the `3ᵈ` guesses
//! and keeps the closest feasible candidate.

mod exact1d;
mod exact2d;
mod iterative;
mod nested;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::WeightSet;

pub use exact1d::{project_exact_1d, solve_multiplier_1d};
pub use exact2d::{constraint_delta_2d, project_exact_2d};
pub use iterative::{alternating_projection, dykstra_projection, AlternatingMode};
pub use nested::{nested_projection, NestedOptions};

/// Truncation to `[-1, 1]`.
#[inline]
pub fn clamp(z: f64) -> f64 {
    z.clamp(-1.0, 1.0)
}

pub fn project_box(y: &[f64]) -> Vec<f64> {
    y.iter().map(|&v| clamp(v)).collect()
}

pub(crate) fn project_box_in_place(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = clamp(*v));
}

/// Projection onto the plane `⟨w, x⟩ = c`.
pub fn project_hyperplane(y: &[f64], w: &[f64], c: f64) -> Vec<f64> {
    let mut x = y.to_vec();
    project_hyperplane_in_place(&mut x, w, c, norm_sq(w));
    x
}

pub(crate) fn project_hyperplane_in_place(x: &mut [f64], w: &[f64], c: f64, w_norm_sq: f64) {
    assert_eq!(x.len(), w.len(), "weight row length mismatch");
    assert!(w_norm_sq > 0.0, "cannot project onto a plane with a zero normal");
    let t = (dot(w, x) - c) / w_norm_sq;
    x.iter_mut().zip(w).for_each(|(xi, wi)| *xi -= t * wi);
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// The balance constraints of one projection problem.
///
/// `totals[j]` is the reference mass `Wⱼ` of the slab half-width `ε·Wⱼ`. When
/// some vertices are fixed, the rows cover only the free ones while `Wⱼ`
/// stays the mass of the whole (sub)graph, and `shifts` absorbs the fixed
/// contribution.
#[derive(Clone, Debug, PartialEq)]
pub struct BalanceSpec {
    rows: Vec<Vec<f64>>,
    norms: Vec<f64>,
    totals: Vec<f64>,
    epsilon: f64,
    shifts: Vec<f64>,
}

impl BalanceSpec {
    /// Slabs centred at zero with `Wⱼ` equal to the row sums.
    pub fn new(ws: &WeightSet, epsilon: f64) -> Result<Self> {
        Self::from_rows(ws.rows().to_vec(), ws.totals().to_vec(), epsilon, vec![0.0; ws.d()])
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, totals: Vec<f64>, epsilon: f64, shifts: Vec<f64>) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::Invalid(format!("epsilon {epsilon} must be a finite value ≥ 0")));
        }
        if totals.len() != rows.len() || shifts.len() != rows.len() {
            return Err(Error::Invalid("rows, totals and shifts must have equal length".into()));
        }
        let n = rows.first().map_or(0, Vec::len);
        for (j, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Invalid(format!("weight row {j} has length {} ≠ {n}", row.len())));
            }
            if row.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
                return Err(Error::Invalid(format!("weight row {j} is not strictly positive")));
            }
            if !(totals[j] > 0.0) {
                return Err(Error::Invalid(format!("reference total {j} must be positive")));
            }
            if !(shifts[j].abs() <= (1.0 + epsilon) * totals[j] * (1.0 + 1e-12)) {
                return Err(Error::Invalid(format!(
                    "slab centre {} exceeds the reachable range ±{}",
                    shifts[j],
                    (1.0 + epsilon) * totals[j]
                )));
            }
        }
        let norms = rows.iter().map(|r| norm_sq(r)).collect();
        Ok(BalanceSpec {
            rows,
            norms,
            totals,
            epsilon,
            shifts,
        })
    }

    pub fn with_shifts(self, shifts: Vec<f64>) -> Result<Self> {
        Self::from_rows(self.rows, self.totals, self.epsilon, shifts)
    }

    pub fn n(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn d(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.rows[j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub(crate) fn row_norm_sq(&self, j: usize) -> f64 {
        self.norms[j]
    }

    pub fn total(&self, j: usize) -> f64 {
        self.totals[j]
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn shift(&self, j: usize) -> f64 {
        self.shifts[j]
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn half_width(&self, j: usize) -> f64 {
        self.epsilon * self.totals[j]
    }

    /// `⟨wʲ, x⟩ - bⱼ`.
    pub fn residual(&self, x: &[f64], j: usize) -> f64 {
        dot(&self.rows[j], x) - self.shifts[j]
    }

    /// Largest slab violation relative to `Wⱼ` (zero when inside every slab).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        (0..self.d())
            .map(|j| ((self.residual(x, j).abs() - self.half_width(j)) / self.totals[j]).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Membership in `K` up to `tol·Wⱼ` on every slab.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter().all(|v| v.abs() <= 1.0 + 1e-12) && self.max_violation(x) <= tol
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Exact,
    AlternatingOneShot,
    Alternating,
    Dykstra,
    Nested,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::AlternatingOneShot => "alternating-one-shot",
            Method::Alternating => "alternating",
            Method::Dykstra => "dykstra",
            Method::Nested => "nested",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exact" => Method::Exact,
            "alternating-one-shot" | "alternating_one_shot" => Method::AlternatingOneShot,
            "alternating" => Method::Alternating,
            "dykstra" => Method::Dykstra,
            "nested" => Method::Nested,
            other => return Err(Error::Invalid(format!("unknown projection method `{other}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionResult {
    pub x: Vec<f64>,
    /// Signed slab multipliers. Empty for alternating projections, which do
    /// not produce them; Dykstra reports its correction magnitudes.
    pub lambda: Vec<f64>,
    pub method: Method,
    /// Rounds, search steps or swept regions, depending on the method.
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionOptions {
    /// Feasibility tolerance of exact methods, relative to `Wⱼ`.
    pub exact_tol: f64,
    /// Convergence tolerance of iterative methods.
    pub tol: f64,
    pub max_rounds: usize,
    pub nested: NestedOptions,
    /// Seed of the randomized intersection sampling in the 2-D solver.
    pub seed: u64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            exact_tol: 1e-9,
            tol: 1e-6,
            max_rounds: 10_000,
            nested: NestedOptions::default(),
            seed: 0x5EED,
        }
    }
}

/// Projects `y` onto `K` with the requested method.
pub fn project_k(y: &[f64], spec: &BalanceSpec, method: Method, opts: &ProjectionOptions) -> Result<ProjectionResult> {
    if spec.d() > 0 && y.len() != spec.n() {
        return Err(Error::Invalid(format!(
            "point has {} coordinates but the weights cover {}",
            y.len(),
            spec.n()
        )));
    }
    match method {
        Method::Exact if spec.d() <= 2 => enumerate_sign_patterns(y, spec, Method::Exact, opts),
        Method::Exact | Method::Nested => enumerate_sign_patterns(y, spec, Method::Nested, opts),
        Method::AlternatingOneShot => {
            alternating_projection(y, spec, AlternatingMode::OneShot, opts.tol, opts.max_rounds)
        }
        Method::Alternating => alternating_projection(y, spec, AlternatingMode::ToConvergence, opts.tol, opts.max_rounds),
        Method::Dykstra => dykstra_projection(y, spec, opts.tol, opts.max_rounds),
    }
}

/// Solves the equality-constrained problem for the dimensions in `active`
/// with the given targets.
fn solve_active(
    y: &[f64],
    spec: &BalanceSpec,
    active: &[usize],
    targets: &[f64],
    solver: Method,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    match (solver, active.len()) {
        (Method::Exact, 1) => project_exact_1d(y, spec.row(active[0]), targets[0]),
        (Method::Exact, 2) => project_exact_2d(
            y,
            spec.row(active[0]),
            spec.row(active[1]),
            targets[0],
            targets[1],
            opts,
        ),
        _ => {
            let rows: Vec<&[f64]> = active.iter().map(|&j| spec.row(j)).collect();
            nested_projection(y, &rows, targets, &opts.nested)
        }
    }
}

fn enumerate_sign_patterns(
    y: &[f64],
    spec: &BalanceSpec,
    solver: Method,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    let d = spec.d();
    let mut best: Option<(f64, usize, ProjectionResult)> = None;
    let mut tried = 0usize;
    let patterns = 3usize.pow(d as u32);
    'patterns: for code in 0..patterns {
        // Digit 0 → dropped, 1 → upper face, 2 → lower face.
        let mut signs = vec![0i8; d];
        let mut c = code;
        for s in signs.iter_mut() {
            *s = match c % 3 {
                0 => 0,
                1 => 1,
                _ => -1,
            };
            c /= 3;
        }
        // A zero-width slab has a single face; try it once and skip the sign test.
        for j in 0..d {
            if signs[j] == -1 && spec.half_width(j) == 0.0 {
                continue 'patterns;
            }
        }
        let active: Vec<usize> = (0..d).filter(|&j| signs[j] != 0).collect();
        let targets: Vec<f64> = active
            .iter()
            .map(|&j| spec.shift(j) + f64::from(signs[j]) * spec.half_width(j))
            .collect();
        tried += 1;
        let candidate = if active.is_empty() {
            ProjectionResult {
                x: project_box(y),
                lambda: Vec::new(),
                method: solver,
                iterations: 0,
            }
        } else {
            match solve_active(y, spec, &active, &targets, solver, opts) {
                Ok(r) => r,
                Err(Error::Infeasible(_)) | Err(Error::NonConvergence { .. }) => continue,
                Err(e) => return Err(e),
            }
        };
        let mut lambda = vec![0.0; d];
        for (slot, &j) in active.iter().enumerate() {
            lambda[j] = candidate.lambda[slot];
        }
        let sign_ok = active.iter().all(|&j| {
            let scale = 1.0 + lambda[j].abs();
            spec.half_width(j) == 0.0 || f64::from(signs[j]) * lambda[j] >= -1e-7 * scale
        });
        if !sign_ok || !spec.contains(&candidate.x, opts.exact_tol.max(1e-9)) {
            continue;
        }
        let distance = dist(&candidate.x, y);
        let zeros = d - active.len();
        let better = match &best {
            None => true,
            Some((bd, bz, _)) => {
                let tie = (distance - bd).abs() <= 1e-12 * (1.0 + bd);
                if tie {
                    zeros > *bz
                } else {
                    distance < *bd
                }
            }
        };
        if better {
            best = Some((
                distance,
                zeros,
                ProjectionResult {
                    x: candidate.x,
                    lambda,
                    method: solver,
                    iterations: tried,
                },
            ));
        }
    }
    match best {
        Some((_, _, mut r)) => {
            r.iterations = tried;
            Ok(r)
        }
        None => Err(Error::Infeasible(
            "no sign pattern of the multipliers yields a feasible projection".into(),
        )),
    }
}
