//! Exact projection onto `B∞ ∩ {⟨w¹,x⟩ = c₁} ∩ {⟨w²,x⟩ = c₂}`.
//!
//! In the multiplier plane `(λ₁, λ₂)` coordinate `i` changes regime across the
//! two parallel boundary lines `yᵢ - λ₁w¹ᵢ - λ₂w²ᵢ = ±1`. Inside a region cut
//! out by these lines both constraint functions are affine, so the multipliers
//! solve a 2×2 system there.
//!
//! For fixed `λ₁` the second constraint pins `λ₂` through the 1-D solver, and
//! the remaining violation `Δ(λ₁)` of the first constraint is monotone. A
//! randomized binary search over the `λ₁` coordinates of line intersections
//! narrows the root down to a vertical strip that contains no intersection.
//! The lines keep a fixed vertical order inside such a strip, and a bottom to
//! top sweep over the regions with constant-time coefficient updates finds the
//! region holding the solution.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::exact1d::{solve_multiplier_1d_bracketed, solve_multiplier_1d_with, Scratch, Settled};
use super::{clamp, dot, norm_sq, Method, ProjectionOptions, ProjectionResult};
use crate::error::{Error, Result};

/// Hits collected per sampling round.
const SAMPLE_HITS: usize = 33;
/// Below this many hits the strip is considered sparse.
const DENSE_HITS: usize = 8;

pub fn project_exact_2d(
    y: &[f64],
    w1: &[f64],
    w2: &[f64],
    c1: f64,
    c2: f64,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    let problem = Problem::new(y, w1, w2, c1, c2, opts.exact_tol)?;
    if let Some(r) = problem.accept(0.0, 0.0, 0) {
        return Ok(r);
    }
    let cos = dot(w1, w2) / (norm_sq(w1) * norm_sq(w2)).sqrt();
    if cos.abs() > 1.0 - 1e-12 {
        return problem.collinear();
    }
    // Δ is non-increasing; the increasing run only matters when round-off
    // breaks that.
    // Restricting the search to the box relies on exact monotonicity of the
    // inner multiplier; the unrestricted runs back it up.
    for (increasing, boxed) in [(false, true), (true, true), (false, false), (true, false)] {
        let mut search = Search::new(&problem, increasing, boxed, opts.seed);
        if let Some(r) = search.run()? {
            return Ok(r);
        }
    }
    Err(Error::Infeasible(format!(
        "no multipliers satisfy both equalities (targets {c1}, {c2})"
    )))
}

/// `Δ(λ₁) = ⟨w¹, x⟩ - c₁` where `x = clamp(y - λ₁w¹ - λ₂w²)` and `λ₂` is
/// chosen so that `⟨w², x⟩ = c₂`.
pub fn constraint_delta_2d(y: &[f64], w1: &[f64], w2: &[f64], c1: f64, c2: f64, lambda1: f64) -> Result<f64> {
    let problem = Problem::new(y, w1, w2, c1, c2, 1e-9)?;
    let mut buf = vec![0.0; y.len()];
    let (delta, _) = problem.delta(lambda1, &mut Scratch::default(), &mut buf)?;
    Ok(delta)
}

struct Problem<'a> {
    y: &'a [f64],
    w: [&'a [f64]; 2],
    c: [f64; 2],
    totals: [f64; 2],
    tol: [f64; 2],
}

impl<'a> Problem<'a> {
    fn new(y: &'a [f64], w1: &'a [f64], w2: &'a [f64], c1: f64, c2: f64, exact_tol: f64) -> Result<Self> {
        let n = y.len();
        if w1.len() != n || w2.len() != n {
            return Err(Error::Invalid("weight row length mismatch".into()));
        }
        if w2.iter().any(|&v| !(v > 0.0 && v.is_finite())) || w1.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("second weight row must be strictly positive".into()));
        }
        let totals = [w1.iter().map(|v| v.abs()).sum::<f64>(), w2.iter().sum::<f64>()];
        for (c, t) in [c1, c2].into_iter().zip(totals) {
            if !(c.abs() <= t * (1.0 + 1e-12) + 1e-300) {
                return Err(Error::Infeasible(format!("target {c} lies outside the reachable range ±{t}")));
            }
        }
        Ok(Problem {
            y,
            w: [w1, w2],
            c: [c1, c2],
            totals,
            tol: [exact_tol * totals[0].max(1e-300), exact_tol * totals[1].max(1e-300)],
        })
    }

    fn n(&self) -> usize {
        self.y.len()
    }

    fn point(&self, l1: f64, l2: f64) -> Vec<f64> {
        (0..self.n())
            .map(|i| clamp(self.y[i] - l1 * self.w[0][i] - l2 * self.w[1][i]))
            .collect()
    }

    /// The candidate `(λ₁, λ₂)` if it satisfies both equalities.
    fn accept(&self, l1: f64, l2: f64, iterations: usize) -> Option<ProjectionResult> {
        if !(l1.is_finite() && l2.is_finite()) {
            return None;
        }
        let x = self.point(l1, l2);
        let ok = (0..2).all(|j| (dot(self.w[j], &x) - self.c[j]).abs() <= self.tol[j]);
        ok.then(|| ProjectionResult {
            x,
            lambda: vec![l1, l2],
            method: Method::Exact,
            iterations,
        })
    }

    fn delta(&self, l1: f64, scratch: &mut Scratch, buf: &mut [f64]) -> Result<(f64, f64)> {
        for ((b, &yi), &wi) in buf.iter_mut().zip(self.y).zip(self.w[0]) {
            *b = yi - l1 * wi;
        }
        let l2 = solve_multiplier_1d_with(buf, self.w[1], self.c[1], scratch)?;
        let h1: f64 = buf
            .iter()
            .zip(self.w[0])
            .zip(self.w[1])
            .map(|((&b, &a), &v)| a * clamp(b - l2 * v))
            .sum();
        Ok((h1 - self.c[0], l2))
    }

    /// Parallel rows: both equalities constrain the same linear form.
    fn collinear(&self) -> Result<ProjectionResult> {
        let l2 = solve_multiplier_1d_with(self.y, self.w[1], self.c[1], &mut Scratch::default())?;
        self.accept(0.0, l2, 1).ok_or_else(|| {
            Error::Infeasible("parallel weight rows with inconsistent targets".into())
        })
    }
}

/// Order-preserving map from `f64` to `u64`.
#[inline]
fn ord(v: f64) -> u64 {
    let bits = (v + 0.0).to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | 1 << 63
    }
}

/// Boundary lines `λ₂ = k·λ₁ + b`. Line `2i` is the lower (`+1`) line of
/// coordinate `i`, line `2i + 1` the upper (`-1`) one. Both lines of a
/// coordinate share one record `[k, yᵢ/w²ᵢ, 1/w²ᵢ]`.
struct Lines {
    coords: Vec<[f64; 3]>,
}

impl Lines {
    fn new(p: &Problem) -> Lines {
        let coords = (0..p.n())
            .map(|i| {
                let inv = 1.0 / p.w[1][i];
                [-p.w[0][i] * inv, p.y[i] * inv, inv]
            })
            .collect();
        Lines { coords }
    }

    #[inline]
    fn k(&self, t: usize) -> f64 {
        self.coords[t / 2][0]
    }

    #[inline]
    fn b(&self, t: usize) -> f64 {
        let c = &self.coords[t / 2];
        if t.is_multiple_of(2) {
            c[1] - c[2]
        } else {
            c[1] + c[2]
        }
    }

    #[inline]
    fn at(&self, t: usize, l1: f64) -> f64 {
        self.k(t) * l1 + self.b(t)
    }

    #[inline]
    fn intersection(&self, a: usize, b: usize) -> Option<f64> {
        if a / 2 == b / 2 {
            return None;
        }
        let dk = self.k(a) - self.k(b);
        if dk == 0.0 {
            return None;
        }
        Some((self.b(b) - self.b(a)) / dk)
    }
}

struct Search<'p, 'a> {
    p: &'p Problem<'a>,
    lines: Lines,
    increasing: bool,
    /// Restrict the work to the box `[l, r] × [λ₂(r), λ₂(l)]`.
    boxed: bool,
    rng: ChaCha8Rng,
    scratch: Scratch,
    work: usize,
    /// Current strip and the inner multiplier at its ends. `λ₂(λ₁)` is
    /// non-increasing, so the solution lies in the box spanned by them.
    l: f64,
    r: f64,
    l2_at_l: f64,
    l2_at_r: f64,
    /// Coordinates with a boundary line through the box.
    relevant: Vec<u32>,
    /// Regime of the other coordinates: 0 at `+1`, 1 linear, 2 at `-1`.
    state: Vec<u8>,
    fixed: Sums,
    y_buf: Vec<f64>,
    w_buf: Vec<f64>,
}

#[inline]
fn pad(v: f64) -> f64 {
    1e-9 * (1.0 + v.abs())
}

impl<'p, 'a> Search<'p, 'a> {
    fn new(p: &'p Problem<'a>, increasing: bool, boxed: bool, seed: u64) -> Self {
        Search {
            lines: Lines::new(p),
            p,
            increasing,
            boxed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            scratch: Scratch::default(),
            work: 0,
            l: f64::NEG_INFINITY,
            r: f64::INFINITY,
            l2_at_l: f64::INFINITY,
            l2_at_r: f64::NEG_INFINITY,
            relevant: (0..p.n() as u32).collect(),
            state: vec![0; p.n()],
            fixed: Sums::empty(),
            y_buf: Vec::with_capacity(p.n()),
            w_buf: Vec::with_capacity(p.n()),
        }
    }

    fn band(&self) -> (f64, f64) {
        if self.boxed {
            (self.l2_at_r - pad(self.l2_at_r), self.l2_at_l + pad(self.l2_at_l))
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        }
    }

    fn run(&mut self) -> Result<Option<ProjectionResult>> {
        let mut hits = Vec::with_capacity(SAMPLE_HITS);
        let mut boost = 1;
        let set = loop {
            let len = 2 * self.relevant.len();
            let pairs = len as f64 * (len as f64 - 1.0) / 2.0;
            let cap = (4 * len).max(1024);
            let drawn = self.sample(2 * len * boost, &mut hits);
            let estimate = (hits.len().max(1) as f64 / drawn.max(1) as f64) * pairs;
            if hits.len() < DENSE_HITS || estimate <= cap as f64 / 2.0 {
                if let Some(set) = self.enumerate(cap) {
                    break set;
                }
                if hits.is_empty() {
                    boost *= 2;
                    continue;
                }
            }
            let mid = hits.len() / 2;
            let (_, &mut pivot, _) = hits.select_nth_unstable_by(mid, f64::total_cmp);
            if let Some(res) = self.step(pivot)? {
                return Ok(Some(res));
            }
        };

        let mut set = set;
        while !set.is_empty() {
            let mid = set.len() / 2;
            let (_, &mut pivot, _) = set.select_nth_unstable_by(mid, f64::total_cmp);
            if let Some(res) = self.step(pivot)? {
                return Ok(Some(res));
            }
            let (l, r) = (self.l, self.r);
            set.retain(|&t| t > l && t < r);
        }
        Ok(self.sweep())
    }

    /// Evaluates Δ at `pivot` and moves the strip end on the side without
    /// the root; returns the solution when Δ vanishes there.
    fn step(&mut self, pivot: f64) -> Result<Option<ProjectionResult>> {
        self.work += 1;
        let p = self.p;
        self.y_buf.clear();
        self.w_buf.clear();
        for &i in &self.relevant {
            let i = i as usize;
            self.y_buf.push(p.y[i] - pivot * p.w[0][i]);
            self.w_buf.push(p.w[1][i]);
        }
        let f = &self.fixed;
        // The fixed coordinates add an affine term in λ₂ to each constraint.
        let offset = Settled {
            saturated: f.cst[1],
            wy: f.wy[1] - f.s[1][0] * pivot,
            ww: f.s[1][1],
        };
        let bracket = self.band();
        let solved = solve_multiplier_1d_bracketed(
            &self.y_buf,
            &self.w_buf,
            p.c[1],
            bracket,
            offset,
            p.totals[1],
            &mut self.scratch,
        );
        let (l2, h1) = match solved {
            Some(l2) => {
                let rel: f64 = self
                    .relevant
                    .iter()
                    .zip(&self.y_buf)
                    .zip(&self.w_buf)
                    .map(|((&i, &b), &v)| p.w[0][i as usize] * clamp(b - l2 * v))
                    .sum();
                (l2, f.cst[0] + f.wy[0] - f.s[0][0] * pivot - f.s[0][1] * l2 + rel)
            }
            None => {
                let full: Vec<f64> = (0..p.n()).map(|i| p.y[i] - pivot * p.w[0][i]).collect();
                let l2 = solve_multiplier_1d_with(&full, p.w[1], p.c[1], &mut self.scratch)?;
                let h1 = full
                    .iter()
                    .zip(p.w[0])
                    .zip(p.w[1])
                    .map(|((&b, &a), &v)| a * clamp(b - l2 * v))
                    .sum::<f64>();
                (l2, h1)
            }
        };
        let delta = h1 - p.c[0];
        if delta.abs() <= 1e-3 * p.tol[0] {
            if let Some(res) = p.accept(pivot, l2, self.work) {
                return Ok(Some(res));
            }
        }
        if (delta < 0.0) == self.increasing {
            self.l = pivot;
            self.l2_at_l = l2;
        } else {
            self.r = pivot;
            self.l2_at_r = l2;
        }
        self.refilter();
        Ok(None)
    }

    /// Value range of line `t` over the strip.
    fn span(&self, t: usize) -> (f64, f64) {
        let at = |x: f64| {
            if x.is_finite() {
                self.lines.at(t, x)
            } else {
                let k = self.lines.k(t);
                if k == 0.0 {
                    self.lines.b(t)
                } else if (k > 0.0) == (x > 0.0) {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
        };
        let (a, b) = (at(self.l), at(self.r));
        (a.min(b), a.max(b))
    }

    /// Moves coordinates whose lines miss the box into the fixed sums.
    fn refilter(&mut self) {
        if !self.boxed {
            return;
        }
        let (lo2, hi2) = self.band();
        let mut relevant = std::mem::take(&mut self.relevant);
        relevant.retain(|&i| {
            let i = i as usize;
            let (lower_min, lower_max) = self.span(2 * i);
            let (upper_min, upper_max) = self.span(2 * i + 1);
            let regime = if lower_min > hi2 {
                0
            } else if upper_max < lo2 {
                2
            } else if lower_max < lo2 && upper_min > hi2 {
                1
            } else {
                return true;
            };
            self.state[i] = regime;
            self.fixed.add(self.p, i, regime);
            false
        });
        self.relevant = relevant;
    }

    /// Random pairs of relevant lines crossing inside the box. Returns the
    /// number of pairs drawn.
    fn sample(&mut self, budget: usize, hits: &mut Vec<f64>) -> usize {
        hits.clear();
        let count = self.relevant.len() as u64;
        if count < 2 {
            return 0;
        }
        let (l, r) = (self.l, self.r);
        let (lo2, hi2) = self.band();
        for drawn in 1..=budget {
            let bits = self.rng.next_u64();
            let a = (((bits & 0xFFFF_FFFF) * count) >> 32) as usize;
            let mut b = (((bits >> 32) * (count - 1)) >> 32) as usize;
            if b >= a {
                b += 1;
            }
            let signs = bits.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 62;
            let ta = 2 * self.relevant[a] as usize + (signs & 1) as usize;
            let tb = 2 * self.relevant[b] as usize + (signs >> 1) as usize;
            if let Some(t) = self.lines.intersection(ta, tb) {
                if t > l && t < r {
                    let v = self.lines.at(ta, t);
                    if v >= lo2 && v <= hi2 {
                        hits.push(t);
                        if hits.len() >= SAMPLE_HITS {
                            return drawn;
                        }
                    }
                }
            }
        }
        budget
    }

    /// Relevant lines sorted by their order just right of `l`, keyed by the
    /// order at `r`. Parallel lines share a key at `r = +∞`, which is harmless
    /// since they never cross.
    fn strip_order(&self) -> Vec<(u64, u32)> {
        let (l, r) = (self.l, self.r);
        let lines = &self.lines;
        let at_r = |t: usize| if r.is_finite() { ord(lines.at(t, r)) } else { ord(lines.k(t)) };
        let mut items: Vec<(u128, u32)> = self
            .relevant
            .iter()
            .flat_map(|&i| [2 * i, 2 * i + 1])
            .map(|t| {
                let tu = t as usize;
                let key = if l.is_finite() {
                    (ord(lines.at(tu, l)) as u128) << 64 | at_r(tu) as u128
                } else {
                    (ord(-lines.k(tu)) as u128) << 64 | ord(lines.b(tu)) as u128
                };
                (key, t)
            })
            .collect();
        items.sort_unstable();
        items.into_iter().map(|(_, t)| (at_r(t as usize), t)).collect()
    }

    /// `λ₁` coordinates of the crossings inside the box, or `None` when the
    /// strip holds more than `cap` crossings.
    fn enumerate(&self, cap: usize) -> Option<Vec<f64>> {
        let mut items = self.strip_order();
        let mut out = Vec::new();
        let (l, r) = (self.l, self.r);
        let (lo2, hi2) = self.band();
        let lines = &self.lines;
        let mut count = 0usize;
        let complete = merge_inversions(&mut items, |left, right, remaining| {
            count += remaining;
            if count > cap {
                return false;
            }
            for &(_, a) in left {
                if let Some(t) = lines.intersection(a as usize, right as usize) {
                    if t > l && t < r {
                        let v = lines.at(right as usize, t);
                        if v >= lo2 && v <= hi2 {
                            out.push(t);
                        }
                    }
                }
            }
            true
        });
        complete.then_some(out)
    }

    /// Visits the regions of the relevant lines in the strip from bottom to top.
    fn sweep(&mut self) -> Option<ProjectionResult> {
        let (l, r) = (self.l, self.r);
        let p = self.p;
        let lines = &self.lines;
        let m = interior(l, r);
        let mut order: Vec<(f64, f64, u32)> = self
            .relevant
            .iter()
            .flat_map(|&i| [2 * i, 2 * i + 1])
            .map(|t| (lines.at(t as usize, m), lines.k(t as usize), t))
            .collect();
        order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut state = self.state.clone();
        let mut sums = self.fixed.clone();
        for &i in &self.relevant {
            state[i as usize] = 0;
            sums.add(p, i as usize, 0);
        }
        for region in 0..=order.len() {
            if region > 0 {
                let t = order[region - 1].2 as usize;
                sums.cross(p, t);
                state[t / 2] += 1;
            }
            self.work += 1;
            let geom = Geometry {
                l,
                r,
                m,
                lower: (region > 0).then(|| order[region - 1].2 as usize),
                upper: (region < order.len()).then(|| order[region].2 as usize),
            };
            let Some((l1, l2)) = sums.solve(p, lines, &geom, 1e-6) else {
                continue;
            };
            if !geom.contains(lines, l1, l2) {
                continue;
            }
            let exact = Sums::from_state(p, &state);
            if let Some((l1, l2)) = exact.solve(p, lines, &geom, 1e-9) {
                if let Some(res) = p.accept(l1, l2, self.work) {
                    return Some(res);
                }
            }
        }
        None
    }
}

/// A point strictly inside `(l, r)`.
fn interior(l: f64, r: f64) -> f64 {
    match (l.is_finite(), r.is_finite()) {
        (true, true) => 0.5 * l + 0.5 * r,
        (true, false) => l + l.abs().max(1.0),
        (false, true) => r - r.abs().max(1.0),
        (false, false) => 0.0,
    }
}

/// Bottom-up merge sort by key. For each strictly inverted pair run it calls
/// `visit(left_remaining, right_line, left_remaining.len())`; returning
/// `false` aborts, in which case the result is `false`.
fn merge_inversions(items: &mut Vec<(u64, u32)>, mut visit: impl FnMut(&[(u64, u32)], u32, usize) -> bool) -> bool {
    let len = items.len();
    let mut src = std::mem::take(items);
    let mut dst = src.clone();
    let mut width = 1;
    while width < len {
        let mut start = 0;
        while start < len {
            let mid = (start + width).min(len);
            let end = (start + 2 * width).min(len);
            let (mut i, mut j, mut o) = (start, mid, start);
            while i < mid && j < end {
                if src[j].0 < src[i].0 {
                    if !visit(&src[i..mid], src[j].1, mid - i) {
                        return false;
                    }
                    dst[o] = src[j];
                    j += 1;
                } else {
                    dst[o] = src[i];
                    i += 1;
                }
                o += 1;
            }
            dst[o..o + (mid - i)].copy_from_slice(&src[i..mid]);
            o += mid - i;
            dst[o..o + (end - j)].copy_from_slice(&src[j..end]);
            start = end;
        }
        std::mem::swap(&mut src, &mut dst);
        width *= 2;
    }
    *items = src;
    true
}

/// One region of an intersection-free strip.
struct Geometry {
    l: f64,
    r: f64,
    m: f64,
    lower: Option<usize>,
    upper: Option<usize>,
}

impl Geometry {
    fn bounds(&self, lines: &Lines, l1: f64) -> (f64, f64) {
        (
            self.lower.map_or(f64::NEG_INFINITY, |t| lines.at(t, l1)),
            self.upper.map_or(f64::INFINITY, |t| lines.at(t, l1)),
        )
    }

    fn contains(&self, lines: &Lines, l1: f64, l2: f64) -> bool {
        let tol1 = 1e-9 * (1.0 + l1.abs());
        if !(l1 >= self.l - tol1 && l1 <= self.r + tol1) {
            return false;
        }
        let (lo, hi) = self.bounds(lines, l1);
        let tol2 = 1e-7 * (1.0 + l2.abs() + lo.abs().min(hi.abs()));
        l2 >= lo - tol2 && l2 <= hi + tol2
    }

    /// `λ₁` range in the region along the line `λ₂ = α + βλ₁`.
    fn along(&self, lines: &Lines, alpha: f64, beta: f64) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (self.l, self.r);
        // Each bound reads `d·λ₁ ≤ e`.
        let mut constrain = |d: f64, e: f64| {
            if d > 0.0 {
                hi = hi.min(e / d);
            } else if d < 0.0 {
                lo = lo.max(e / d);
            } else if e < -1e-9 * (1.0 + alpha.abs()) {
                lo = f64::INFINITY;
            }
        };
        if let Some(t) = self.lower {
            constrain(lines.k(t) - beta, alpha - lines.b(t));
        }
        if let Some(t) = self.upper {
            constrain(beta - lines.k(t), lines.b(t) - alpha);
        }
        if lo <= hi {
            Some((lo, hi))
        } else if lo - hi <= 1e-9 * (1.0 + lo.abs()) {
            Some((hi, lo))
        } else {
            None
        }
    }

    /// A representative point of the whole region, close to the origin.
    fn pick(&self, lines: &Lines) -> (f64, f64) {
        let l1 = if self.l < 0.0 && 0.0 < self.r { 0.0 } else { self.m };
        let (lo, hi) = self.bounds(lines, l1);
        let l2 = if lo <= hi {
            0.0f64.clamp(lo, hi)
        } else {
            0.5 * (lo + hi)
        };
        (l1, l2)
    }
}

/// Region coefficients: `hⱼ(λ) = cst[j] + wy[j] - Σₖ s[j][k]·λₖ`.
#[derive(Clone, Debug)]
struct Sums {
    cst: [f64; 2],
    wy: [f64; 2],
    s: [[f64; 2]; 2],
    linear: usize,
}

impl Sums {
    fn empty() -> Sums {
        Sums {
            cst: [0.0; 2],
            wy: [0.0; 2],
            s: [[0.0; 2]; 2],
            linear: 0,
        }
    }

    fn from_state(p: &Problem, state: &[u8]) -> Sums {
        let mut sums = Sums::empty();
        for (i, &regime) in state.iter().enumerate() {
            sums.add(p, i, regime);
        }
        sums
    }

    /// Adds coordinate `i` in `regime` (0 at `+1`, 1 linear, 2 at `-1`).
    #[inline]
    fn add(&mut self, p: &Problem, i: usize, regime: u8) {
        let w = [p.w[0][i], p.w[1][i]];
        match regime {
            0 => {
                self.cst[0] += w[0];
                self.cst[1] += w[1];
            }
            1 => {
                self.add_linear(w, p.y[i], 1.0);
                self.linear += 1;
            }
            _ => {
                self.cst[0] -= w[0];
                self.cst[1] -= w[1];
            }
        }
    }

    #[inline]
    fn add_linear(&mut self, w: [f64; 2], y: f64, sign: f64) {
        for j in 0..2 {
            self.wy[j] += sign * w[j] * y;
            for k in 0..2 {
                self.s[j][k] += sign * w[j] * w[k];
            }
        }
    }

    /// Moves upward across line `t`.
    #[inline]
    fn cross(&mut self, p: &Problem, t: usize) {
        let i = t / 2;
        let w = [p.w[0][i], p.w[1][i]];
        self.cst[0] -= w[0];
        self.cst[1] -= w[1];
        if t.is_multiple_of(2) {
            self.add_linear(w, p.y[i], 1.0);
            self.linear += 1;
        } else {
            self.add_linear(w, p.y[i], -1.0);
            self.linear -= 1;
        }
    }

    /// Multipliers solving both equalities in the region, if any. `slack` is
    /// the relative tolerance of the consistency tests in degenerate regions.
    fn solve(&self, p: &Problem, lines: &Lines, geom: &Geometry, slack: f64) -> Option<(f64, f64)> {
        let rhs = [
            self.cst[0] + self.wy[0] - p.c[0],
            self.cst[1] + self.wy[1] - p.c[1],
        ];
        let [[s11, s12], [_, s22]] = self.s;
        let scale = [slack * p.totals[0].max(1e-300), slack * p.totals[1].max(1e-300)];
        if self.linear == 0 || !(s22 > 0.0) {
            let flat = rhs[0].abs() <= scale[0] && rhs[1].abs() <= scale[1];
            return flat.then(|| geom.pick(lines));
        }
        let det = s11 * s22 - s12 * s12;
        if det > 1e-12 * s11 * s22 {
            let l1 = (rhs[0] * s22 - s12 * rhs[1]) / det;
            let l2 = (s11 * rhs[1] - s12 * rhs[0]) / det;
            return Some((l1, l2));
        }
        // Rank one: the linear coordinates have proportional weights.
        let ratio = s12 / s22;
        if (rhs[0] - ratio * rhs[1]).abs() > scale[0] {
            return None;
        }
        let alpha = rhs[1] / s22;
        let beta = -ratio;
        let (lo, hi) = geom.along(lines, alpha, beta)?;
        let l1 = (-alpha * beta / (1.0 + beta * beta)).clamp(lo, hi);
        Some((l1, alpha + beta * l1))
    }
}
