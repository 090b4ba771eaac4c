//! Projected gradient ascent on the relaxation `max ½ Σ_{uv∈E} (x_u x_v + 1)`
//! over `K = [-1,1]ⁿ ∩ slabs`.
//!
//! Each iteration perturbs the iterate (by default only the first one), takes
//! a step along `A·z`, projects back onto `K` and freezes coordinates that
//! reached `±τ`. Frozen coordinates leave the projection problem; their mass
//! moves into the slab centres.

use std::io::Write;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::projection::{dist, norm_sq, project_k, BalanceSpec, Method, ProjectionOptions};
use crate::rng::standard_normal;
use crate::weights::WeightSet;

/// Noise stream offset; stream `t` of the seed perturbs iteration `t`.
const NOISE_STREAM: u64 = 0x6E01_5E00;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepMode {
    /// `y = z + γ·A z` with a constant `γ`.
    Fixed(f64),
    /// Choose `γ` so that the projected step has about this length. `None`
    /// means `2·√n / I`.
    TargetLength(Option<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GdConfig {
    pub iterations: usize,
    pub epsilon: f64,
    /// Per-coordinate standard deviation of the first perturbation; `None`
    /// means `1/√n`.
    pub noise_std: Option<f64>,
    /// Perturb every iteration instead of only the first.
    pub noise_every_iteration: bool,
    pub step_mode: StepMode,
    pub projection: Method,
    /// Method of the last `finishing_rounds` iterations.
    pub finishing_projection: Method,
    pub finishing_rounds: usize,
    /// Freeze coordinates with `|xᵢ| ≥ τ`; `None` disables freezing.
    pub fix_threshold: Option<f64>,
    /// Slab centres as fractions of `Wⱼ`: part 0 should carry
    /// `(1 + centre)/2` of every weight.
    pub center: f64,
    /// Starting point; zero when `None`.
    pub initial: Option<Vec<f64>>,
    pub seed: u64,
    pub projection_options: ProjectionOptions,
}

impl Default for GdConfig {
    fn default() -> Self {
        GdConfig {
            iterations: 100,
            epsilon: 0.05,
            noise_std: None,
            noise_every_iteration: false,
            step_mode: StepMode::TargetLength(None),
            projection: Method::AlternatingOneShot,
            finishing_projection: Method::Alternating,
            finishing_rounds: 3,
            fix_threshold: Some(0.99),
            center: 0.0,
            initial: None,
            seed: 0,
            projection_options: ProjectionOptions::default(),
        }
    }
}

impl GdConfig {
    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Invalid("at least one iteration is required".into()));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Invalid(format!("epsilon {} must be ≥ 0", self.epsilon)));
        }
        if let Some(t) = self.fix_threshold {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::Invalid(format!("fix threshold {t} must lie in (0, 1]")));
            }
        }
        match self.step_mode {
            StepMode::Fixed(g) if !(g >= 0.0 && g.is_finite()) => {
                return Err(Error::Invalid(format!("step size {g} must be ≥ 0")));
            }
            StepMode::TargetLength(Some(l)) if !(l > 0.0 && l.is_finite()) => {
                return Err(Error::Invalid(format!("target length {l} must be > 0")));
            }
            _ => {}
        }
        if !(self.center.abs() < 1.0) {
            return Err(Error::Invalid(format!("slab centre {} must lie in (-1, 1)", self.center)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FractionalSolution {
    pub x: Vec<f64>,
    /// `0` for free coordinates, otherwise the frozen sign.
    pub fixed: Vec<i8>,
    pub objective: f64,
}

impl FractionalSolution {
    pub fn fixed_count(&self) -> usize {
        self.fixed.iter().filter(|&&s| s != 0).count()
    }

    pub fn free(&self) -> Vec<usize> {
        (0..self.x.len()).filter(|&i| self.fixed[i] == 0).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub objective: f64,
    pub step_len: f64,
    /// Largest `|⟨wʲ, x⟩ - bⱼ| / Wⱼ` of the fractional point.
    pub max_imbalance: f64,
    pub fixed_count: usize,
    pub gamma: f64,
    /// The projected step fell short of half the target length.
    pub saturated: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub const CSV_HEADER: &'static str = "iter,objective,step_len,max_imbalance,fixed_count";

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.records {
            writeln!(
                out,
                "{},{:.12e},{:.12e},{:.12e},{}",
                r.iter, r.objective, r.step_len, r.max_imbalance, r.fixed_count
            )?;
        }
        Ok(())
    }
}

/// `½ Σ_{uv∈E} (x_u x_v + 1)`.
pub fn fractional_objective(g: &Graph, x: &[f64]) -> f64 {
    assert_eq!(x.len(), g.n(), "point length does not match the graph");
    0.5 * g.edges().map(|(u, v)| x[u] * x[v] + 1.0).sum::<f64>()
}

/// Adds independent `N(0, η²)` noise to the free coordinates. Draw `i` of
/// `stream` always goes to vertex `i`.
pub fn gd_noise(x: &[f64], fixed: &[i8], eta: f64, seed: u64, stream: u64) -> Vec<f64> {
    if eta == 0.0 {
        return x.to_vec();
    }
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            if fixed.get(i).copied().unwrap_or(0) != 0 {
                v
            } else {
                v + eta * standard_normal(seed, stream, i as u64)
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub x: Vec<f64>,
    pub gamma: f64,
    pub displacement: f64,
    pub saturated: bool,
}

/// Finds `γ` with `‖P(z + γ·g) - z‖ ∈ [½, 3/2]·target` by doubling and at
/// most 20 bisection steps, starting from `γ₀` (or `target/‖g‖`).
pub fn adaptive_step(
    z: &[f64],
    gradient: &[f64],
    target: f64,
    spec: &BalanceSpec,
    method: Method,
    opts: &ProjectionOptions,
    gamma0: Option<f64>,
) -> Result<StepOutcome> {
    let gnorm = norm_sq(gradient).sqrt();
    if gnorm == 0.0 || z.is_empty() {
        return Ok(StepOutcome {
            x: z.to_vec(),
            gamma: 0.0,
            displacement: 0.0,
            saturated: false,
        });
    }
    let eval = |gamma: f64| -> Result<(Vec<f64>, f64)> {
        let y: Vec<f64> = z.iter().zip(gradient).map(|(a, b)| a + gamma * b).collect();
        let x = project_k(&y, spec, method, opts)?.x;
        let d = dist(&x, z);
        Ok((x, d))
    };
    let (lo_ok, hi_ok) = (0.5 * target, 1.5 * target);
    let within = |d: f64| d >= lo_ok && d <= hi_ok;

    let mut gamma = gamma0.filter(|g| *g > 0.0 && g.is_finite()).unwrap_or(target / gnorm);
    let (mut x, mut d) = eval(gamma)?;
    if within(d) {
        return Ok(StepOutcome {
            x,
            gamma,
            displacement: d,
            saturated: false,
        });
    }
    // Bracket [lo, hi] with d(lo) < target band ≤ d(hi).
    let (mut lo, mut hi);
    let mut best = (x.clone(), gamma, d);
    if d < lo_ok {
        lo = gamma;
        loop {
            let next = 2.0 * gamma;
            let (nx, nd) = eval(next)?;
            if nd > best.2 {
                best = (nx.clone(), next, nd);
            }
            if within(nd) {
                return Ok(StepOutcome {
                    x: nx,
                    gamma: next,
                    displacement: nd,
                    saturated: false,
                });
            }
            if nd > hi_ok {
                hi = next;
                break;
            }
            // The projection no longer lets the point move further.
            if nd <= d + 1e-6 * target || next > 1e12 * (target / gnorm) {
                return Ok(StepOutcome {
                    saturated: best.2 < lo_ok,
                    x: best.0,
                    gamma: best.1,
                    displacement: best.2,
                });
            }
            lo = next;
            gamma = next;
            d = nd;
        }
    } else {
        hi = gamma;
        lo = 0.0;
        let mut prev = d;
        for _ in 0..60 {
            let next = 0.5 * hi;
            let (nx, nd) = eval(next)?;
            // Bringing z itself into K already moves it further than the
            // target; the gradient part no longer matters.
            if prev - nd <= 0.01 * target {
                return Ok(StepOutcome {
                    x: best.0,
                    gamma: best.1,
                    displacement: best.2,
                    saturated: false,
                });
            }
            prev = nd;
            if within(nd) {
                return Ok(StepOutcome {
                    x: nx,
                    gamma: next,
                    displacement: nd,
                    saturated: false,
                });
            }
            if nd < lo_ok {
                lo = next;
                break;
            }
            hi = next;
        }
    }
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        (x, d) = eval(mid)?;
        if within(d) {
            return Ok(StepOutcome {
                x,
                gamma: mid,
                displacement: d,
                saturated: false,
            });
        }
        if d < lo_ok {
            lo = mid;
        } else {
            hi = mid;
        }
        gamma = mid;
    }
    Ok(StepOutcome {
        x,
        gamma,
        displacement: d,
        saturated: d < lo_ok,
    })
}

/// Slab centres for the free coordinates: `bⱼ - Σ_{fixed} wʲᵢ xᵢ`.
fn free_shifts(ws: &WeightSet, centers: &[f64], state: &FractionalSolution) -> Vec<f64> {
    (0..ws.d())
        .map(|j| {
            let fixed: f64 = ws
                .row(j)
                .iter()
                .zip(&state.fixed)
                .filter(|(_, &s)| s != 0)
                .map(|(&w, &s)| w * s as f64)
                .sum();
            centers[j] - fixed
        })
        .collect()
}

/// Freezes free coordinates with `|xᵢ| ≥ τ` at their sign. Returns how many
/// were frozen.
pub fn fix_vertices(
    state: &mut FractionalSolution,
    ws: &WeightSet,
    centers: &[f64],
    epsilon: f64,
    tau: f64,
) -> Result<usize> {
    let mut count = 0;
    for (x, s) in state.x.iter_mut().zip(state.fixed.iter_mut()) {
        if *s == 0 && x.abs() >= tau {
            *s = if *x > 0.0 { 1 } else { -1 };
            *x = *s as f64;
            count += 1;
        }
    }
    if count > 0 {
        let shifts = free_shifts(ws, centers, state);
        for (j, &b) in shifts.iter().enumerate() {
            let free_mass: f64 = ws
                .row(j)
                .iter()
                .zip(&state.fixed)
                .filter(|(_, &s)| s == 0)
                .map(|(w, _)| w)
                .sum();
            let reach = epsilon * ws.total(j) + free_mass;
            if b.abs() > reach * (1.0 + 1e-12) {
                return Err(Error::Infeasible(format!(
                    "frozen vertices leave dimension `{}` off centre by {:.6e}, more than the free mass can offset ({:.6e})",
                    ws.label(j),
                    b.abs(),
                    reach
                )));
            }
        }
    }
    Ok(count)
}

fn spec_for(ws: &WeightSet, centers: &[f64], epsilon: f64, state: &FractionalSolution, free: &[usize]) -> Result<BalanceSpec> {
    let rows = ws
        .rows()
        .iter()
        .map(|r| free.iter().map(|&i| r[i]).collect())
        .collect();
    BalanceSpec::from_rows(rows, ws.totals().to_vec(), epsilon, free_shifts(ws, centers, state))
}

fn max_slab_deviation(ws: &WeightSet, centers: &[f64], x: &[f64]) -> f64 {
    (0..ws.d())
        .map(|j| {
            let s: f64 = ws.row(j).iter().zip(x).map(|(w, v)| w * v).sum();
            (s - centers[j]).abs() / ws.total(j)
        })
        .fold(0.0, f64::max)
}

/// Runs the gradient loop and returns the final fractional point.
pub fn run_gd(g: &Graph, ws: &WeightSet, cfg: &GdConfig) -> Result<(FractionalSolution, IterationTrace)> {
    cfg.validate()?;
    let n = g.n();
    let mut trace = IterationTrace::default();
    if n == 0 {
        return Ok((
            FractionalSolution {
                x: Vec::new(),
                fixed: Vec::new(),
                objective: 0.0,
            },
            trace,
        ));
    }
    if ws.n() != n {
        return Err(Error::Invalid(format!(
            "weights cover {} vertices but the graph has {n}",
            ws.n()
        )));
    }
    if ws.d() == 0 {
        return Err(Error::Invalid("at least one weight function is required".into()));
    }
    let centers: Vec<f64> = ws.totals().iter().map(|w| cfg.center * w).collect();
    let x0 = match &cfg.initial {
        Some(x) if x.len() != n => {
            return Err(Error::Invalid(format!("initial point has {} coordinates, expected {n}", x.len())));
        }
        Some(x) => x.iter().map(|v| v.clamp(-1.0, 1.0)).collect(),
        None => vec![0.0; n],
    };
    let mut state = FractionalSolution {
        objective: fractional_objective(g, &x0),
        x: x0,
        fixed: vec![0; n],
    };
    let eta = cfg.noise_std.unwrap_or(1.0 / (n as f64).sqrt());
    let target = match cfg.step_mode {
        StepMode::TargetLength(Some(l)) => l,
        _ => 2.0 * (n as f64).sqrt() / cfg.iterations as f64,
    };

    let mut free = state.free();
    let mut spec = spec_for(ws, &centers, cfg.epsilon, &state, &free)?;
    let mut grad = vec![0.0; n];
    let mut gamma_hint = None;
    let mut stalls = 0;
    let mut renoise = false;
    for t in 0..cfg.iterations {
        if free.is_empty() {
            break;
        }
        let perturb = t == 0 || cfg.noise_every_iteration || renoise;
        renoise = false;
        let z = if perturb {
            gd_noise(&state.x, &state.fixed, eta, cfg.seed, NOISE_STREAM + t as u64)
        } else {
            state.x.clone()
        };
        g.adjacency_multiply_into(&z, &mut grad);
        let z_free: Vec<f64> = free.iter().map(|&i| z[i]).collect();
        let g_free: Vec<f64> = free.iter().map(|&i| grad[i]).collect();
        let method = if t + cfg.finishing_rounds >= cfg.iterations {
            cfg.finishing_projection
        } else {
            cfg.projection
        };
        let step = match cfg.step_mode {
            StepMode::Fixed(gamma) => {
                let y: Vec<f64> = z_free.iter().zip(&g_free).map(|(a, b)| a + gamma * b).collect();
                let x = project_k(&y, &spec, method, &cfg.projection_options)?.x;
                let displacement = dist(&x, &z_free);
                StepOutcome {
                    x,
                    gamma,
                    displacement,
                    saturated: false,
                }
            }
            StepMode::TargetLength(_) => adaptive_step(
                &z_free,
                &g_free,
                target,
                &spec,
                method,
                &cfg.projection_options,
                gamma_hint,
            )?,
        };
        let mut step = step;
        if step.gamma == 0.0 {
            // The perturbed point still has to be brought back into K.
            step.x = project_k(&z_free, &spec, method, &cfg.projection_options)?.x;
            stalls += 1;
            if stalls == 2 {
                renoise = true;
                stalls = 0;
            }
        } else {
            stalls = 0;
            gamma_hint = Some(step.gamma);
        }
        let mut step_sq = 0.0;
        for (&i, &v) in free.iter().zip(&step.x) {
            step_sq += (state.x[i] - v) * (state.x[i] - v);
            state.x[i] = v;
        }
        if let Some(tau) = cfg.fix_threshold {
            if fix_vertices(&mut state, ws, &centers, cfg.epsilon, tau)? > 0 {
                free = state.free();
                spec = spec_for(ws, &centers, cfg.epsilon, &state, &free)?;
            }
        }
        state.objective = fractional_objective(g, &state.x);
        trace.records.push(IterationRecord {
            iter: t,
            objective: state.objective,
            step_len: step_sq.sqrt(),
            max_imbalance: max_slab_deviation(ws, &centers, &state.x),
            fixed_count: state.fixed_count(),
            gamma: step.gamma,
            saturated: step.saturated,
        });
    }
    Ok((state, trace))
}

/// Largest eigenvalue of `A` by power iteration from a fixed start.
pub fn spectral_radius(g: &Graph, iterations: usize) -> f64 {
    let n = g.n();
    if n == 0 || g.m() == 0 {
        return 0.0;
    }
    // A positive start vector has a component on the Perron vector.
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + crate::rng::uniform(7, 0, i as u64)).collect();
    let mut lambda = 0.0;
    for _ in 0..iterations.max(1) {
        let w = g.adjacency_multiply(&v);
        let norm = norm_sq(&w).sqrt();
        lambda = norm / norm_sq(&v).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = w.into_iter().map(|x| x / norm).collect();
    }
    lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::unit_weights;

    fn triangle() -> Graph {
        Graph::from_index_edges(3, &[(0, 1), (1, 2), (0, 2)])
    }

    fn units(n: usize) -> WeightSet {
        let mut ws = WeightSet::new(n);
        ws.push("unit", unit_weights(n).unwrap()).unwrap();
        ws
    }

    #[test]
    fn objective_examples() {
        let g = triangle();
        assert_eq!(fractional_objective(&g, &[1.0; 3]), 3.0);
        assert_eq!(fractional_objective(&g, &[0.0; 3]), 1.5);
        assert_eq!(fractional_objective(&g, &[1.0, -1.0, 0.0]), 1.0);
    }

    #[test]
    fn noise_examples() {
        let x = vec![0.25; 4];
        assert_eq!(gd_noise(&x, &[0; 4], 0.0, 1, 0), x);
        let z = gd_noise(&x, &[1, 0, 0, -1], 0.5, 1, 0);
        assert_eq!(z[0], 0.25);
        assert_eq!(z[3], 0.25);
        assert_ne!(z[1], 0.25);
    }

    #[test]
    fn noise_mean() {
        let n = 100_000;
        let x = vec![0.0; n];
        let z = gd_noise(&x, &vec![0; n], 1.0, 42, 3);
        let mean = z.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() <= 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn zero_gradient_step() {
        let ws = units(2);
        let spec = BalanceSpec::new(&ws, 0.1).unwrap();
        let r = adaptive_step(&[0.1, -0.1], &[0.0, 0.0], 1.0, &spec, Method::Exact, &ProjectionOptions::default(), None).unwrap();
        assert_eq!(r.x, vec![0.1, -0.1]);
        assert_eq!(r.gamma, 0.0);
    }

    #[test]
    fn interior_step_hits_target() {
        let ws = units(4);
        let spec = BalanceSpec::new(&ws, 1.0).unwrap();
        let z = [0.0; 4];
        let g = [0.1, -0.1, 0.05, -0.05];
        let r = adaptive_step(&z, &g, 0.2, &spec, Method::Exact, &ProjectionOptions::default(), None).unwrap();
        assert!((r.displacement - 0.2).abs() < 1e-6);
        assert!(!r.saturated);
    }

    #[test]
    fn saturated_step() {
        // Every coordinate is pushed outward from the corner it sits on.
        let ws = units(4);
        let spec = BalanceSpec::new(&ws, 1.0).unwrap();
        let z = [1.0, 1.0, -1.0, -1.0];
        let g = [1.0, 1.0, -1.0, -1.0];
        let r = adaptive_step(&z, &g, 1.0, &spec, Method::Exact, &ProjectionOptions::default(), None).unwrap();
        assert!(r.saturated);
        assert!(r.displacement < 0.5);
    }

    #[test]
    fn fixing_examples() {
        let mut ws = WeightSet::new(2);
        ws.push("w", vec![2.0, 1.0]).unwrap();
        let mut s = FractionalSolution {
            x: vec![0.995, -0.2],
            fixed: vec![0, 0],
            objective: 0.0,
        };
        assert_eq!(fix_vertices(&mut s, &ws, &[0.0], 1.0, 0.99).unwrap(), 1);
        assert_eq!(s.fixed, vec![1, 0]);
        assert_eq!(s.x[0], 1.0);
        assert_eq!(free_shifts(&ws, &[0.0], &s), vec![-2.0]);
        assert_eq!(fix_vertices(&mut s, &ws, &[0.0], 1.0, 0.99).unwrap(), 0);
    }

    #[test]
    fn infeasible_fixing() {
        let ws = units(3);
        let mut s = FractionalSolution {
            x: vec![1.0, 1.0, 0.0],
            fixed: vec![0; 3],
            objective: 0.0,
        };
        let err = fix_vertices(&mut s, &ws, &[0.0], 0.0, 0.99).unwrap_err();
        assert!(err.is_infeasible());
    }

    #[test]
    fn edgeless_graph_stays_balanced() {
        let g = Graph::from_index_edges(6, &[]);
        let ws = units(6);
        let (sol, trace) = run_gd(&g, &ws, &GdConfig::default()).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert!(trace.records.iter().all(|r| r.max_imbalance <= 0.05 + 1e-6));
    }

    #[test]
    fn deterministic_and_traced() {
        let g = Graph::from_index_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        let ws = units(6);
        let cfg = GdConfig {
            seed: 9,
            ..GdConfig::default()
        };
        let a = run_gd(&g, &ws, &cfg).unwrap();
        let b = run_gd(&g, &ws, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.1.len() <= cfg.iterations);
        for r in &a.1.records {
            assert!(r.objective <= g.m() as f64);
        }
        assert_eq!(a.0.objective, fractional_objective(&g, &a.0.x));
        let mut buf = Vec::new();
        a.1.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iter,objective,step_len,max_imbalance,fixed_count\n"));
    }

    #[test]
    fn all_fixed_stops_early() {
        let g = Graph::from_index_edges(2, &[(0, 1)]);
        let ws = units(2);
        let cfg = GdConfig {
            epsilon: 1.0,
            initial: Some(vec![1.0, 1.0]),
            iterations: 10,
            projection: Method::Exact,
            finishing_projection: Method::Exact,
            ..GdConfig::default()
        };
        let (sol, trace) = run_gd(&g, &ws, &cfg).unwrap();
        assert_eq!(sol.fixed_count(), 2);
        assert!(trace.len() < 10);
    }

    #[test]
    fn spectral_radius_of_triangle() {
        assert!((spectral_radius(&triangle(), 100) - 2.0).abs() < 1e-9);
    }
}
