//! From fractional points to partitions: randomized rounding, recursive
//! bisection into `k` parts and the hashing baseline.

use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::projection::BalanceSpec;
use crate::rng::{mix64, stable_hash, uniform};
use crate::solver::{run_gd, GdConfig, IterationTrace};
use crate::weights::WeightSet;

/// Random stream of roundings; trial `t` uses stream `ROUND_STREAM + t`.
const ROUND_STREAM: u64 = 0x0A0D_0000;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Provenance {
    pub algorithm: String,
    pub seed: u64,
    pub config_digest: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    k: usize,
    assignment: Vec<u32>,
    provenance: Provenance,
}

impl Partition {
    pub fn new(k: usize, assignment: Vec<u32>) -> Result<Partition> {
        if k == 0 {
            return Err(Error::Invalid("a partition needs at least one part".into()));
        }
        if let Some((v, &p)) = assignment.iter().enumerate().find(|(_, &p)| p as usize >= k) {
            return Err(Error::Invalid(format!("vertex {v} is in part {p} but k = {k}")));
        }
        Ok(Partition {
            k,
            assignment,
            provenance: Provenance::default(),
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Partition {
        self.provenance = provenance;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn part(&self, v: usize) -> usize {
        self.assignment[v] as usize
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &p in &self.assignment {
            sizes[p as usize] += 1;
        }
        sizes
    }

    /// The same `k` restricted to `members`, in that order.
    pub fn restrict(&self, members: &[usize]) -> Partition {
        Partition {
            k: self.k,
            assignment: members.iter().map(|&v| self.assignment[v]).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// As `±1` signs: part 0 is `+1`. Only meaningful for `k = 2`.
    pub fn signs(&self) -> Vec<f64> {
        self.assignment.iter().map(|&p| if p == 0 { 1.0 } else { -1.0 }).collect()
    }

    /// `# k=<k>` followed by `external_id part` lines in id order.
    pub fn write_tsv<W: Write>(&self, g: &Graph, mut out: W) -> Result<()> {
        assert_eq!(self.n(), g.n(), "partition and graph sizes differ");
        writeln!(out, "# k={}", self.k)?;
        // Internal indices are already in ascending id order.
        for (v, &p) in self.assignment.iter().enumerate() {
            writeln!(out, "{}\t{}", g.external_id(v), p)?;
        }
        Ok(())
    }

    /// Reads a partition of `g`. Without a `# k=` header, `k` is one more
    /// than the largest part index.
    pub fn read_tsv<R: BufRead>(reader: R, g: &Graph, source_name: &str) -> Result<Partition> {
        let mut k: Option<usize> = None;
        let mut parts: Vec<Option<u32>> = vec![None; g.n()];
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let text = line.trim();
            if let Some(comment) = text.strip_prefix('#') {
                if let Some(value) = comment.trim().strip_prefix("k=") {
                    let value = value
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| Error::parse(source_name, lineno, format!("bad part count `{value}`")))?;
                    k = Some(value);
                }
                continue;
            }
            if text.is_empty() {
                continue;
            }
            let mut tokens = text.split_whitespace();
            let (Some(id), Some(part), None) = (tokens.next(), tokens.next(), tokens.next()) else {
                return Err(Error::parse(source_name, lineno, "expected `external_id part`"));
            };
            let id: u64 = id
                .parse()
                .map_err(|_| Error::parse(source_name, lineno, format!("bad vertex id `{id}`")))?;
            let part: u32 = part
                .parse()
                .map_err(|_| Error::parse(source_name, lineno, format!("bad part index `{part}`")))?;
            let v = g
                .index_of(id)
                .ok_or_else(|| Error::parse(source_name, lineno, format!("vertex {id} is not in the graph")))?;
            if parts[v].replace(part).is_some() {
                return Err(Error::parse(source_name, lineno, format!("vertex {id} listed twice")));
            }
        }
        let mut assignment = Vec::with_capacity(g.n());
        for (v, p) in parts.into_iter().enumerate() {
            match p {
                Some(p) => assignment.push(p),
                None => {
                    return Err(Error::Invalid(format!(
                        "{source_name}: vertex {} has no part",
                        g.external_id(v)
                    )))
                }
            }
        }
        let k = k.unwrap_or_else(|| assignment.iter().max().map_or(1, |&p| p as usize + 1));
        if let Some((v, &p)) = assignment.iter().enumerate().find(|(_, &p)| p as usize >= k) {
            return Err(Error::Invalid(format!(
                "{source_name}: vertex {} is in part {p} but k = {k}",
                g.external_id(v)
            )));
        }
        Partition::new(k, assignment)
    }
}

/// Puts vertex `i` in part 0 with probability `(1 + xᵢ)/2`.
pub fn randomized_round(x: &[f64], seed: u64, trial: u64) -> Partition {
    let assignment = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let u = uniform(seed, ROUND_STREAM + trial, i as u64);
            u32::from(u >= 0.5 * (1.0 + v))
        })
        .collect();
    Partition {
        k: 2,
        assignment,
        provenance: Provenance {
            algorithm: "round".into(),
            seed,
            config_digest: trial,
        },
    }
}

/// How well a rounding meets the slabs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BalanceTier {
    /// Every slab holds at `ε`.
    Strict,
    /// Every slab holds at `ε + 4·√(max w / W)`.
    Relaxed,
    Violated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rounding {
    pub partition: Partition,
    pub tier: BalanceTier,
    pub uncut: usize,
    /// Largest `|⟨wʲ, s⟩ - bⱼ| / Wⱼ - ε` over the dimensions.
    pub excess: f64,
    pub trial: u64,
}

/// Per-dimension rounding slack `4·√(max w / W)`.
pub fn rounding_slack(spec: &BalanceSpec, j: usize) -> f64 {
    let max_w = spec.row(j).iter().copied().fold(0.0, f64::max);
    4.0 * (max_w / spec.total(j)).sqrt()
}

fn classify(g: &Graph, spec: &BalanceSpec, p: Partition, trial: u64) -> Rounding {
    let s = p.signs();
    let mut tier = BalanceTier::Strict;
    let mut excess = f64::NEG_INFINITY;
    for j in 0..spec.d() {
        let dev = spec.residual(&s, j).abs() / spec.total(j) - spec.epsilon();
        excess = excess.max(dev);
        let t = if dev <= 1e-12 {
            BalanceTier::Strict
        } else if dev <= rounding_slack(spec, j) {
            BalanceTier::Relaxed
        } else {
            BalanceTier::Violated
        };
        tier = tier.max(t);
    }
    let a = p.assignment();
    let uncut = g.edges().filter(|&(u, v)| a[u] == a[v]).count();
    Rounding {
        partition: p,
        tier,
        uncut,
        excess,
        trial,
    }
}

/// Rounds `trials` times and keeps the best: the best balance tier first,
/// then the most uncut edges, then the smallest excess, then the earliest
/// trial. `spec` covers all vertices with ±1 in place of part 0 / part 1.
pub fn round_best_of(g: &Graph, x: &[f64], spec: &BalanceSpec, trials: usize, seed: u64) -> Rounding {
    assert_eq!(x.len(), g.n(), "point length does not match the graph");
    (0..trials.max(1) as u64)
        .into_par_iter()
        .map(|t| classify(g, spec, randomized_round(x, seed, t), t))
        .min_by(|a, b| {
            a.tier
                .cmp(&b.tier)
                .then(b.uncut.cmp(&a.uncut))
                .then(a.excess.total_cmp(&b.excess))
                .then(a.trial.cmp(&b.trial))
        })
        .expect("at least one trial")
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionConfig {
    pub k: usize,
    pub gd: GdConfig,
    pub round_trials: usize,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            k: 2,
            gd: GdConfig::default(),
            round_trials: 8,
        }
    }
}

impl PartitionConfig {
    /// FNV-1a over the debug form of the configuration.
    pub fn digest(&self) -> u64 {
        format!("{self:?}")
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
    }
}

/// One bisection of the recursion tree.
#[derive(Clone, Debug, PartialEq)]
pub struct BisectionRecord {
    /// `""` for the root, then `0`/`1` per level.
    pub path: String,
    pub n: usize,
    pub k: usize,
    pub tier: BalanceTier,
    pub trace: IterationTrace,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionOutcome {
    pub partition: Partition,
    /// In depth-first order, root first.
    pub bisections: Vec<BisectionRecord>,
}

/// Splits `g` into `k` parts by recursive bisection.
pub fn recursive_partition(g: &Graph, ws: &WeightSet, cfg: &PartitionConfig) -> Result<PartitionOutcome> {
    let k = cfg.k;
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    if k > g.n().max(1) {
        return Err(Error::Invalid(format!("k = {k} exceeds the vertex count {}", g.n())));
    }
    if ws.n() != g.n() {
        return Err(Error::Invalid(format!(
            "weights cover {} vertices but the graph has {}",
            ws.n(),
            g.n()
        )));
    }
    let mut assignment = vec![0u32; g.n()];
    let members: Vec<usize> = (0..g.n()).collect();
    let mut bisections = Vec::new();
    let node = Node {
        graph: g,
        parent: &members,
        ws,
        k,
        offset: 0,
        code: 0,
        path: String::new(),
    };
    let leaves = split(node, cfg)?;
    for leaf in leaves {
        match leaf {
            Leaf::Part { members, part } => {
                for v in members {
                    assignment[v] = part;
                }
            }
            Leaf::Bisection(r) => bisections.push(r),
        }
    }
    let partition = Partition::new(k, assignment)?.with_provenance(Provenance {
        algorithm: "gd".into(),
        seed: cfg.gd.seed,
        config_digest: cfg.digest(),
    });
    Ok(PartitionOutcome { partition, bisections })
}

struct Node<'a> {
    graph: &'a Graph,
    /// Index in the full graph of every vertex of `graph`.
    parent: &'a [usize],
    ws: &'a WeightSet,
    k: usize,
    offset: u32,
    code: u64,
    path: String,
}

enum Leaf {
    Part { members: Vec<usize>, part: u32 },
    Bisection(BisectionRecord),
}

fn node_seed(seed: u64, code: u64) -> u64 {
    if code == 0 {
        seed
    } else {
        seed ^ mix64(code)
    }
}

fn split(node: Node<'_>, cfg: &PartitionConfig) -> Result<Vec<Leaf>> {
    let n = node.graph.n();
    if node.k == 1 || n == 0 {
        return Ok(vec![Leaf::Part {
            members: node.parent.to_vec(),
            part: node.offset,
        }]);
    }
    let k0 = node.k.div_ceil(2);
    let k1 = node.k / 2;
    let gd = GdConfig {
        center: (k0 as f64 - k1 as f64) / node.k as f64,
        seed: node_seed(cfg.gd.seed, node.code),
        ..cfg.gd.clone()
    };
    let at = |e: Error| match e {
        Error::Infeasible(msg) if !node.path.is_empty() => {
            Error::Infeasible(format!("bisection `{}`: {msg}", node.path))
        }
        Error::Infeasible(msg) => Error::Infeasible(format!("root bisection: {msg}")),
        other => other,
    };
    let (sol, trace) = run_gd(node.graph, node.ws, &gd).map_err(at)?;
    let spec = BalanceSpec::from_rows(
        node.ws.rows().to_vec(),
        node.ws.totals().to_vec(),
        gd.epsilon,
        node.ws.totals().iter().map(|w| gd.center * w).collect(),
    )
    .map_err(at)?;
    let rounding = round_best_of(node.graph, &sol.x, &spec, cfg.round_trials, gd.seed);
    let record = Leaf::Bisection(BisectionRecord {
        path: node.path.clone(),
        n,
        k: node.k,
        tier: rounding.tier,
        trace,
    });

    let sides: Vec<Vec<usize>> = (0..2u32)
        .map(|side| (0..n).filter(|&v| rounding.partition.assignment()[v] == side).collect())
        .collect();
    let child = |side: usize| -> Result<Vec<Leaf>> {
        let local = &sides[side];
        let sub = node.graph.induced_subgraph(local);
        let parent: Vec<usize> = local.iter().map(|&v| node.parent[v]).collect();
        let ws = node.ws.restrict(local);
        split(
            Node {
                graph: &sub.graph,
                parent: &parent,
                ws: &ws,
                k: if side == 0 { k0 } else { k1 },
                offset: node.offset + if side == 0 { 0 } else { k0 as u32 },
                code: 2 * node.code + 1 + side as u64,
                path: format!("{}{side}", node.path),
            },
            cfg,
        )
    };
    let (left, right) = rayon::join(|| child(0), || child(1));
    let mut out = vec![record];
    out.extend(left?);
    out.extend(right?);
    Ok(out)
}

/// Part `stable_hash(id, seed) mod k` for every vertex.
pub fn hash_partition(g: &Graph, k: usize, seed: u64) -> Result<Partition> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let assignment = g
        .external_ids()
        .iter()
        .map(|&id| (stable_hash(id, seed) % k as u64) as u32)
        .collect();
    Ok(Partition::new(k, assignment)?.with_provenance(Provenance {
        algorithm: "hash".into(),
        seed,
        config_digest: k as u64,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::edge_locality;
    use crate::solver::fractional_objective;

    fn units(n: usize) -> WeightSet {
        let mut ws = WeightSet::new(n);
        ws.push("unit", vec![1.0; n]).unwrap();
        ws
    }

    #[test]
    fn integral_rounding() {
        assert!(randomized_round(&[1.0; 5], 3, 0).assignment().iter().all(|&p| p == 0));
        assert!(randomized_round(&[-1.0; 5], 3, 0).assignment().iter().all(|&p| p == 1));
    }

    #[test]
    fn half_rounding_statistics() {
        let n = 10_000;
        let g = Graph::from_index_edges(n, &(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>());
        let x = vec![0.0; n];
        let trials = 1000;
        let (mut size, mut uncut) = (0.0, 0.0);
        for t in 0..trials {
            let p = randomized_round(&x, 5, t);
            size += p.part_sizes()[0] as f64;
            uncut += crate::metrics::uncut_edges(&g, &p) as f64;
        }
        let mean_size = size / trials as f64;
        assert!((4950.0..=5050.0).contains(&mean_size));
        let mean_uncut = uncut / trials as f64;
        let half = fractional_objective(&g, &x);
        // Each edge is uncut with probability ½; the trial mean has variance ≤ m/(4·trials)·3.
        let se = ((g.m() as f64) * 0.75 / trials as f64).sqrt();
        assert!((mean_uncut - half).abs() <= 2.0 * se);
    }

    #[test]
    fn best_of_one_is_plain_rounding() {
        let g = Graph::from_index_edges(4, &[(0, 1), (2, 3)]);
        let spec = BalanceSpec::new(&units(4), 0.5).unwrap();
        let x = [0.3, -0.2, 0.1, 0.0];
        let best = round_best_of(&g, &x, &spec, 1, 11);
        assert_eq!(best.partition.assignment(), randomized_round(&x, 11, 0).assignment());
    }

    #[test]
    fn best_of_integral_point() {
        let g = Graph::from_index_edges(4, &[(0, 1), (2, 3)]);
        let spec = BalanceSpec::new(&units(4), 0.0).unwrap();
        let x = [1.0, 1.0, -1.0, -1.0];
        let best = round_best_of(&g, &x, &spec, 16, 2);
        assert_eq!(best.partition.assignment(), &[0, 0, 1, 1]);
        assert_eq!(best.tier, BalanceTier::Strict);
        assert_eq!(best.uncut, 2);
    }

    #[test]
    fn tsv_roundtrip() {
        let (g, _) = Graph::from_edges([(10u64, 20u64), (20, 30)]);
        let p = Partition::new(3, vec![2, 0, 0]).unwrap();
        let mut buf = Vec::new();
        p.write_tsv(&g, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "# k=3\n10\t2\n20\t0\n30\t0\n");
        let back = Partition::read_tsv(&buf[..], &g, "p.tsv").unwrap();
        assert_eq!(back.assignment(), p.assignment());
        assert_eq!(back.k(), 3);
    }

    #[test]
    fn tsv_rejects_bad_input() {
        let (g, _) = Graph::from_edges([(1u64, 2u64)]);
        assert!(Partition::read_tsv(&b"# k=2\n1 0\n2 2\n"[..], &g, "p").is_err());
        assert!(Partition::read_tsv(&b"1 0\n"[..], &g, "p").is_err());
        let err = Partition::read_tsv(&b"1 0\n9 1\n"[..], &g, "p").unwrap_err();
        assert!(err.to_string().contains('9'));
    }

    #[test]
    fn hash_examples() {
        let (g, _) = Graph::from_edges((0u64..50).map(|i| (i, i + 1)));
        assert!(hash_partition(&g, 1, 0).unwrap().assignment().iter().all(|&p| p == 0));
        assert_eq!(hash_partition(&g, 4, 7).unwrap(), hash_partition(&g, 4, 7).unwrap());
    }

    #[test]
    fn single_part() {
        let g = Graph::from_index_edges(3, &[(0, 1), (1, 2)]);
        let cfg = PartitionConfig {
            k: 1,
            ..PartitionConfig::default()
        };
        let out = recursive_partition(&g, &units(3), &cfg).unwrap();
        assert_eq!(edge_locality(&g, &out.partition), 1.0);
        assert!(out.bisections.is_empty());
    }

    #[test]
    fn two_parts_match_one_bisection() {
        let edges: Vec<(usize, usize)> = (0..20).flat_map(|i| [(i, (i + 1) % 20), (i, (i + 5) % 20)]).collect();
        let g = Graph::from_index_edges(20, &edges);
        let ws = units(20);
        let cfg = PartitionConfig {
            gd: GdConfig {
                seed: 4,
                ..GdConfig::default()
            },
            ..PartitionConfig::default()
        };
        let out = recursive_partition(&g, &ws, &cfg).unwrap();
        let (sol, _) = run_gd(&g, &ws, &cfg.gd).unwrap();
        let spec = BalanceSpec::new(&ws, cfg.gd.epsilon).unwrap();
        let best = round_best_of(&g, &sol.x, &spec, cfg.round_trials, cfg.gd.seed);
        assert_eq!(out.partition.assignment(), best.partition.assignment());
    }

    #[test]
    fn three_parts_cover_everything() {
        let edges: Vec<(usize, usize)> = (0..30).map(|i| (i, (i + 1) % 30)).collect();
        let g = Graph::from_index_edges(30, &edges);
        let cfg = PartitionConfig {
            k: 3,
            gd: GdConfig {
                epsilon: 0.1,
                ..GdConfig::default()
            },
            ..PartitionConfig::default()
        };
        let out = recursive_partition(&g, &units(30), &cfg).unwrap();
        let sizes = out.partition.part_sizes();
        assert_eq!(sizes.iter().sum::<usize>(), 30);
        assert!(sizes.iter().all(|&s| (8..=12).contains(&s)), "{sizes:?}");
        assert_eq!(out.bisections.len(), 2);
        assert_eq!(out.bisections[0].path, "");
    }
}
