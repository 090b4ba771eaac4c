//! Equality-constrained projection for any number of rows by nested
//! bisection on the multipliers.
//!
//! For a prefix `λ₁..λₜ` the later multipliers are chosen recursively so that
//! constraints `t+1..d` hold; the remaining violation of constraint `t` is
//! monotone in `λₜ`, which makes plain bisection applicable at every level.
//! The innermost level is solved exactly.

use super::exact1d::{solve_multiplier_1d_with, Scratch};
use super::{clamp, dot, Method, ProjectionResult};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct NestedOptions {
    /// Bisection stops once a multiplier bracket is narrower than this.
    pub delta: f64,
    /// First bracket half-width. Derived from the data when `None`.
    pub initial_bound: Option<f64>,
    pub max_doublings: u32,
}

impl Default for NestedOptions {
    fn default() -> Self {
        NestedOptions {
            delta: 1e-9,
            initial_bound: None,
            max_doublings: 60,
        }
    }
}

pub fn nested_projection(y: &[f64], rows: &[&[f64]], targets: &[f64], opts: &NestedOptions) -> Result<ProjectionResult> {
    let d = rows.len();
    if d == 0 || targets.len() != d {
        return Err(Error::Invalid("nested projection needs one target per weight row".into()));
    }
    let n = y.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Invalid("weight row length mismatch".into()));
    }
    if rows.iter().any(|r| r.iter().any(|&w| !(w > 0.0 && w.is_finite()))) {
        return Err(Error::Invalid("weight rows must be strictly positive".into()));
    }
    let min_w = rows
        .iter()
        .flat_map(|r| r.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let max_y = y.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let bound = opts
        .initial_bound
        .unwrap_or(if n == 0 { 1.0 } else { (max_y + 1.0) / min_w });
    let mut solver = Nested {
        rows,
        targets,
        totals: rows.iter().map(|r| r.iter().sum()).collect(),
        opts,
        bound,
        evaluations: 0,
        scratch: Scratch::default(),
    };
    let (lambda, x) = solver.level(0, y)?;
    Ok(ProjectionResult {
        x,
        lambda,
        method: Method::Nested,
        iterations: solver.evaluations,
    })
}

struct Nested<'a> {
    rows: &'a [&'a [f64]],
    targets: &'a [f64],
    totals: Vec<f64>,
    opts: &'a NestedOptions,
    bound: f64,
    evaluations: usize,
    scratch: Scratch,
}

impl Nested<'_> {
    /// Multipliers `λₜ..λ_d` and the point they produce from `base`.
    fn level(&mut self, t: usize, base: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let w = self.rows[t];
        if t + 1 == self.rows.len() {
            self.evaluations += 1;
            let lam = solve_multiplier_1d_with(base, w, self.targets[t], &mut self.scratch)?;
            let x = base.iter().zip(w).map(|(&b, &wi)| clamp(b - lam * wi)).collect();
            return Ok((vec![lam], x));
        }
        let flat = 1e-14 * self.totals[t];
        let eval = |me: &mut Self, lam: f64| -> Result<(f64, Vec<f64>, Vec<f64>)> {
            let shifted: Vec<f64> = base.iter().zip(w).map(|(&b, &wi)| b - lam * wi).collect();
            let (mut rest, x) = me.level(t + 1, &shifted)?;
            let f = dot(w, &x) - me.targets[t];
            rest.insert(0, lam);
            Ok((f, rest, x))
        };

        let at_zero = eval(self, 0.0)?;
        if at_zero.0.abs() <= flat {
            return Ok((at_zero.1, at_zero.2));
        }
        let mut b = self.bound;
        let mut bracket = None;
        for _ in 0..=self.opts.max_doublings {
            let lo = eval(self, -b)?;
            let hi = eval(self, b)?;
            if lo.0.abs() <= flat {
                return Ok((lo.1, lo.2));
            }
            if hi.0.abs() <= flat {
                return Ok((hi.1, hi.2));
            }
            if (lo.0 < 0.0) != (hi.0 < 0.0) {
                // Keep the half that holds the sign change relative to zero.
                bracket = Some(if (lo.0 < 0.0) != (at_zero.0 < 0.0) {
                    (-b, 0.0, lo.0 < 0.0)
                } else {
                    (0.0, b, at_zero.0 < 0.0)
                });
                break;
            }
            b *= 2.0;
        }
        let Some((mut lo, mut hi, lo_negative)) = bracket else {
            return Err(Error::Infeasible(format!(
                "constraint {t} could not be bracketed within ±{b:e}"
            )));
        };
        let mut best = at_zero;
        while hi - lo > self.opts.delta {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let probe = eval(self, mid)?;
            if probe.0.abs() <= flat {
                return Ok((probe.1, probe.2));
            }
            if (probe.0 < 0.0) == lo_negative {
                lo = mid;
            } else {
                hi = mid;
            }
            best = probe;
        }
        let final_probe = eval(self, 0.5 * (lo + hi))?;
        if final_probe.0.abs() <= best.0.abs() {
            best = final_probe;
        }
        Ok((best.1, best.2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::project_exact_1d;

    #[test]
    fn one_row_matches_exact() {
        let y = [3.0, 0.2, -1.0];
        let w = [1.0, 1.0, 1.0];
        let r = nested_projection(&y, &[&w], &[0.5], &NestedOptions::default()).unwrap();
        let e = project_exact_1d(&y, &w, 0.5).unwrap();
        assert_eq!(r.x, e.x);
        assert_eq!(r.method, Method::Nested);
    }

    #[test]
    fn two_rows_meet_targets() {
        let y = [2.0, -2.0, 0.7, 0.1];
        let w1 = [1.0, 1.0, 1.0, 1.0];
        let w2 = [1.0, 2.0, 0.5, 3.0];
        let r = nested_projection(&y, &[&w1, &w2], &[0.2, -0.3], &NestedOptions::default()).unwrap();
        assert!((dot(&w1, &r.x) - 0.2).abs() <= 1e-6 * 4.0);
        assert!((dot(&w2, &r.x) + 0.3).abs() <= 1e-6 * 6.5);
        for i in 0..4 {
            let want = clamp(y[i] - r.lambda[0] * w1[i] - r.lambda[1] * w2[i]);
            assert!((r.x[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn unreachable_targets() {
        let w = [1.0, 1.0];
        let r = nested_projection(&[0.0, 0.0], &[&w, &w], &[0.5, -0.5], &NestedOptions::default());
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }
}
