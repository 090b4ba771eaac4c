//! Exact projection onto `B∞ ∩ { x : ⟨w, x⟩ = c }` for one positive row.
//!
//! With `xᵢ(λ) = clamp(yᵢ - λwᵢ)` the constraint value `H(λ) = Σ wᵢxᵢ(λ)` is a
//! non-increasing piecewise linear function with breakpoints `(yᵢ ∓ 1)/wᵢ`.
//! The search repeatedly splits at the median breakpoint of the coordinates
//! whose regime is still undecided. Coordinates whose regime is settled on the
//! current bracket are folded into running sums, so every step costs time
//! proportional to the undecided set and the whole search is linear in
//! expectation. The final bracket contains no breakpoint and is solved in
//! closed form.

use super::{clamp, Method, ProjectionResult};
use crate::error::{Error, Result};

pub fn project_exact_1d(y: &[f64], w: &[f64], c: f64) -> Result<ProjectionResult> {
    assert_eq!(y.len(), w.len(), "weight row length mismatch");
    let mut scratch = Scratch::default();
    let lambda = solve_multiplier_1d_with(y, w, c, &mut scratch)?;
    let x: Vec<f64> = y.iter().zip(w).map(|(&yi, &wi)| clamp(yi - lambda * wi)).collect();
    Ok(ProjectionResult {
        x,
        lambda: vec![lambda],
        method: Method::Exact,
        iterations: scratch.steps,
    })
}

/// The multiplier `λ*` with `Σ wᵢ clamp(yᵢ - λ*wᵢ) = c`. When a whole interval
/// of multipliers solves the equation, the one closest to zero is returned.
pub fn solve_multiplier_1d(y: &[f64], w: &[f64], c: f64) -> Result<f64> {
    solve_multiplier_1d_with(y, w, c, &mut Scratch::default())
}

#[derive(Default)]
pub(crate) struct Scratch {
    active: Vec<u32>,
    points: Vec<f64>,
    mirror: Vec<f64>,
    pub(crate) steps: usize,
}

/// Running sums for coordinates with a settled regime on the bracket:
/// `saturated + wy - λ·ww`.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Settled {
    pub(crate) saturated: f64,
    pub(crate) wy: f64,
    pub(crate) ww: f64,
}

impl Settled {
    #[inline]
    pub(crate) fn value(&self, lambda: f64) -> f64 {
        self.saturated + self.wy - lambda * self.ww
    }
}

#[inline]
fn h_i(yi: f64, wi: f64, lambda: f64) -> f64 {
    wi * clamp(yi - lambda * wi)
}

pub(crate) fn solve_multiplier_1d_with(y: &[f64], w: &[f64], c: f64, scratch: &mut Scratch) -> Result<f64> {
    let total: f64 = w.iter().sum();
    if !(c.abs() <= total * (1.0 + 1e-12) + 1e-300) {
        return Err(Error::Infeasible(format!(
            "target {c} lies outside the reachable range ±{total}"
        )));
    }
    scratch.steps = 0;
    if y.is_empty() {
        return Ok(0.0);
    }
    let c = c.clamp(-total, total);
    let tol = 1e-13 * total;
    let at_zero: f64 = y.iter().zip(w).map(|(&yi, &wi)| h_i(yi, wi, 0.0)).sum();
    if (at_zero - c).abs() <= tol {
        return Ok(0.0);
    }
    // Search on the side of zero that contains a root. On the negative side
    // the largest root is the one nearest to zero; mirroring λ turns it into
    // a smallest root.
    if at_zero > c {
        finite(search(y, w, c, 0.0, f64::INFINITY, Settled::default(), scratch), c)
    } else {
        scratch.mirror.clear();
        scratch.mirror.extend(y.iter().map(|v| -v));
        let mirror = std::mem::take(&mut scratch.mirror);
        let lambda = search(&mirror, w, -c, 0.0, f64::INFINITY, Settled::default(), scratch);
        scratch.mirror = mirror;
        Ok(-finite(lambda, c)?)
    }
}

fn finite(lambda: f64, c: f64) -> Result<f64> {
    if lambda.is_finite() {
        Ok(lambda)
    } else {
        Err(Error::Infeasible(format!("target {c} is not attained by any finite multiplier")))
    }
}

/// Solves `offset(λ) + Σ wᵢ clamp(yᵢ - λwᵢ) = c` with the root known to lie
/// in `[lo, hi]`, where `offset` is an affine term from coordinates handled
/// elsewhere. Returns `None` when the bracket turns out to be wrong, judged
/// against `scale`.
pub(crate) fn solve_multiplier_1d_bracketed(
    y: &[f64],
    w: &[f64],
    c: f64,
    (lo, hi): (f64, f64),
    offset: Settled,
    scale: f64,
    scratch: &mut Scratch,
) -> Option<f64> {
    if !(lo <= hi) {
        return None;
    }
    scratch.steps = 0;
    let lambda = search(y, w, c, lo, hi, offset, scratch);
    if !lambda.is_finite() {
        return None;
    }
    let value: f64 = offset.value(lambda) + y.iter().zip(w).map(|(&yi, &wi)| h_i(yi, wi, lambda)).sum::<f64>();
    ((value - c).abs() <= 1e-12 * scale).then_some(lambda)
}

/// Smallest root of the non-increasing `H - c` on `[lo, hi]`, or the bracket
/// end nearest to it.
fn search(y: &[f64], w: &[f64], c: f64, mut lo: f64, mut hi: f64, init: Settled, scratch: &mut Scratch) -> f64 {
    scratch.active.clear();
    scratch.active.extend(0..y.len() as u32);
    let mut settled = init;
    prune(y, w, &mut scratch.active, &mut settled, lo, hi);

    loop {
        scratch.points.clear();
        for &i in &scratch.active {
            let (yi, wi) = (y[i as usize], w[i as usize]);
            for p in [(yi - 1.0) / wi, (yi + 1.0) / wi] {
                if p > lo && p < hi {
                    scratch.points.push(p);
                }
            }
        }
        if scratch.points.is_empty() {
            // Rounding can leave coordinates whose breakpoints sit on the
            // bracket ends; none of them changes regime inside it.
            for &i in &scratch.active {
                let (yi, wi) = (y[i as usize], w[i as usize]);
                if (yi + 1.0) / wi <= lo {
                    settled.saturated -= wi;
                } else if (yi - 1.0) / wi >= hi {
                    settled.saturated += wi;
                } else {
                    settled.wy += wi * yi;
                    settled.ww += wi * wi;
                }
            }
            break;
        }
        scratch.steps += 1;
        let mid = scratch.points.len() / 2;
        let (_, &mut pivot, _) = scratch.points.select_nth_unstable_by(mid, f64::total_cmp);
        let value = settled.value(pivot)
            + scratch
                .active
                .iter()
                .map(|&i| h_i(y[i as usize], w[i as usize], pivot))
                .sum::<f64>();
        if value > c {
            lo = pivot;
        } else {
            hi = pivot;
        }
        prune(y, w, &mut scratch.active, &mut settled, lo, hi);
    }

    // H is affine on [lo, hi]: H(λ) = saturated + wy - λ·ww.
    if settled.ww > 0.0 {
        ((settled.saturated + settled.wy - c) / settled.ww).clamp(lo, hi)
    } else if settled.saturated > c {
        hi
    } else {
        lo
    }
}

/// Folds coordinates whose regime is constant on `(lo, hi)` into `settled`.
fn prune(y: &[f64], w: &[f64], active: &mut Vec<u32>, settled: &mut Settled, lo: f64, hi: f64) {
    active.retain(|&i| {
        let (yi, wi) = (y[i as usize], w[i as usize]);
        // Compare the clamp argument at both ends; avoids dividing by wᵢ.
        let at_lo = yi - lo * wi;
        let at_hi = yi - hi * wi;
        if at_lo <= -1.0 {
            settled.saturated -= wi;
            false
        } else if at_hi >= 1.0 {
            settled.saturated += wi;
            false
        } else if at_lo <= 1.0 && at_hi >= -1.0 {
            settled.wy += wi * yi;
            settled.ww += wi * wi;
            false
        } else {
            true
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn constraint(x: &[f64], w: &[f64]) -> f64 {
        x.iter().zip(w).map(|(a, b)| a * b).sum()
    }

    #[test]
    fn already_feasible() {
        let r = project_exact_1d(&[0.5, -0.5], &[1.0, 1.0], 0.0).unwrap();
        assert_eq!(r.x, vec![0.5, -0.5]);
        assert_eq!(r.lambda, vec![0.0]);
    }

    #[test]
    fn symmetric_midpoint() {
        let r = project_exact_1d(&[2.0, 2.0], &[1.0, 1.0], 0.0).unwrap();
        assert!((r.lambda[0] - 2.0).abs() < 1e-12);
        assert!(r.x.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn hand_solved_segment() {
        // 0.2 - 2λ = 0.5 on λ ∈ [-2, 0].
        let r = project_exact_1d(&[3.0, 0.2, -1.0], &[1.0, 1.0, 1.0], 0.5).unwrap();
        assert!((r.lambda[0] + 0.15).abs() < 1e-12);
        let want = [1.0, 0.35, -0.85];
        for (a, b) in r.x.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unreachable_target() {
        assert!(matches!(
            project_exact_1d(&[0.0, 0.0], &[1.0, 1.0], 2.5),
            Err(Error::Infeasible(_))
        ));
        let r = project_exact_1d(&[0.0, 0.0], &[1.0, 1.0], 2.0).unwrap();
        assert_eq!(r.x, vec![1.0, 1.0]);
    }

    #[test]
    fn flat_segment_prefers_small_multiplier() {
        // Every λ ∈ [-2, 2] gives x = (1, -1).
        assert_eq!(solve_multiplier_1d(&[3.0, -3.0], &[1.0, 1.0], 0.0).unwrap(), 0.0);
        // x = (1, 1) for every λ ≤ 2; the root nearest zero is 0 itself.
        assert_eq!(solve_multiplier_1d(&[3.0, 3.0], &[1.0, 1.0], 2.0).unwrap(), 0.0);
        // x = (1, 1) needs λ ≤ -2 here.
        let l = solve_multiplier_1d(&[-1.0, -1.0], &[1.0, 1.0], 2.0).unwrap();
        assert!((l + 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_input() {
        let r = project_exact_1d(&[], &[], 0.0).unwrap();
        assert!(r.x.is_empty());
        assert!(project_exact_1d(&[], &[], 1.0).is_err());
    }

    /// Reference root by sorting all breakpoints.
    fn sorted_root(y: &[f64], w: &[f64], c: f64) -> f64 {
        let h = |l: f64| -> f64 { y.iter().zip(w).map(|(&a, &b)| h_i(a, b, l)).sum() };
        let mut pts: Vec<f64> = y
            .iter()
            .zip(w)
            .flat_map(|(&a, &b)| [(a - 1.0) / b, (a + 1.0) / b])
            .collect();
        pts.sort_by(f64::total_cmp);
        // H is non-increasing; find consecutive breakpoints bracketing c.
        for win in pts.windows(2) {
            let (a, b) = (h(win[0]), h(win[1]));
            if a >= c && c >= b {
                if a == b {
                    return win[0];
                }
                return win[0] + (a - c) / (a - b) * (win[1] - win[0]);
            }
        }
        if c >= h(pts[0]) {
            pts[0]
        } else {
            *pts.last().unwrap()
        }
    }

    proptest! {
        #[test]
        fn matches_sorted_breakpoint_search(
            pts in proptest::collection::vec((-4.0f64..4.0, 0.05f64..2.0), 1..60),
            frac in -0.99f64..0.99,
        ) {
            let y: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let w: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let total: f64 = w.iter().sum();
            let c = frac * total;
            let r = project_exact_1d(&y, &w, c).unwrap();
            prop_assert!((constraint(&r.x, &w) - c).abs() <= 1e-10 * total);
            let want = sorted_root(&y, &w, c);
            let xw: Vec<f64> = y.iter().zip(&w).map(|(&a, &b)| clamp(a - want * b)).collect();
            for (a, b) in r.x.iter().zip(&xw) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
            for ((&yi, &wi), &xi) in y.iter().zip(&w).zip(&r.x) {
                prop_assert!((xi - clamp(yi - r.lambda[0] * wi)).abs() <= 1e-12);
            }
        }
    }
}
