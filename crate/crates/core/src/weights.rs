//! Vertex weight functions defining the balance constraints.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// `d` strictly positive weight rows over the same `n` vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet {
    n: usize,
    rows: Vec<Vec<f64>>,
    totals: Vec<f64>,
    labels: Vec<String>,
}

impl WeightSet {
    pub fn new(n: usize) -> Self {
        WeightSet {
            n,
            rows: Vec::new(),
            totals: Vec::new(),
            labels: Vec::new(),
        }
    }

    /// Appends a row after checking its length and positivity.
    pub fn push(&mut self, label: impl Into<String>, row: Vec<f64>) -> Result<()> {
        let label = label.into();
        if row.len() != self.n {
            return Err(Error::Invalid(format!(
                "weight row `{label}` has {} entries, expected {}",
                row.len(),
                self.n
            )));
        }
        if let Some(i) = row.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::NonPositiveWeight {
                vertex: i as u64,
                dimension: label,
            });
        }
        self.totals.push(row.iter().sum());
        self.rows.push(row);
        self.labels.push(label);
        Ok(())
    }

    pub fn from_rows(rows: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let n = rows.first().map_or(0, |(_, r)| r.len());
        let mut ws = WeightSet::new(n);
        for (label, row) in rows {
            ws.push(label, row)?;
        }
        Ok(ws)
    }

    pub fn n(&self) -> usize {
        self.n
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

    pub fn total(&self, j: usize) -> f64 {
        self.totals[j]
    }

    pub fn totals(&self) -> &[f64] {
        &self.totals
    }

    pub fn label(&self, j: usize) -> &str {
        &self.labels[j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Weights of the vertices in `members`, in that order.
    pub fn restrict(&self, members: &[usize]) -> WeightSet {
        let rows: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|r| members.iter().map(|&v| r[v]).collect())
            .collect();
        WeightSet {
            n: members.len(),
            totals: rows.iter().map(|r| r.iter().sum()).collect(),
            rows,
            labels: self.labels.clone(),
        }
    }
}

fn require_no_isolated(g: &Graph, what: &str) -> Result<()> {
    match g.isolated_vertices().first() {
        Some(&v) => Err(Error::NonPositiveWeight {
            vertex: g.external_id(v),
            dimension: what.to_owned(),
        }),
        None => Ok(()),
    }
}

pub fn unit_weights(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Invalid("cannot build weights for an empty graph".into()));
    }
    Ok(vec![1.0; n])
}

pub fn degree_weights(g: &Graph) -> Result<Vec<f64>> {
    require_no_isolated(g, "degree")?;
    Ok((0..g.n()).map(|v| g.degree(v) as f64).collect())
}

/// Sum of neighbour degrees.
pub fn neighbor_degree_sum_weights(g: &Graph) -> Result<Vec<f64>> {
    require_no_isolated(g, "nbrdeg")?;
    let deg: Vec<f64> = (0..g.n()).map(|v| g.degree(v) as f64).collect();
    Ok(g.adjacency_multiply(&deg))
}

/// Fixed-iteration PageRank on the undirected graph, uniform start and
/// uniform teleport. Every vertex spreads its score evenly over its
/// neighbours, so graphs with isolated vertices are rejected.
pub fn pagerank_weights(g: &Graph, damping: f64, iterations: usize) -> Result<Vec<f64>> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::Invalid(format!("damping {damping} must lie in (0, 1)")));
    }
    if iterations == 0 {
        return Err(Error::Invalid("pagerank needs at least one iteration".into()));
    }
    require_no_isolated(g, "pagerank")?;
    let n = g.n();
    let teleport = (1.0 - damping) / n as f64;
    let inv_deg: Vec<f64> = (0..n).map(|v| 1.0 / g.degree(v) as f64).collect();
    let mut rank = vec![1.0 / n as f64; n];
    let mut share = vec![0.0; n];
    let mut next = vec![0.0; n];
    for _ in 0..iterations {
        for v in 0..n {
            share[v] = rank[v] * inv_deg[v];
        }
        g.adjacency_multiply_into(&share, &mut next);
        for v in 0..n {
            next[v] = teleport + damping * next[v];
        }
        std::mem::swap(&mut rank, &mut next);
    }
    let total: f64 = rank.iter().sum();
    rank.iter_mut().for_each(|r| *r /= total);
    Ok(rank)
}

/// One token of a weight-spec string such as `unit,degree,pagerank:0.85:30`.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightKind {
    Unit,
    Degree,
    NeighborDegreeSum,
    PageRank { damping: f64, iterations: usize },
}

impl WeightKind {
    pub fn build(&self, g: &Graph) -> Result<Vec<f64>> {
        match *self {
            WeightKind::Unit => unit_weights(g.n()),
            WeightKind::Degree => degree_weights(g),
            WeightKind::NeighborDegreeSum => neighbor_degree_sum_weights(g),
            WeightKind::PageRank { damping, iterations } => pagerank_weights(g, damping, iterations),
        }
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKind::Unit => f.write_str("unit"),
            WeightKind::Degree => f.write_str("degree"),
            WeightKind::NeighborDegreeSum => f.write_str("nbrdeg"),
            WeightKind::PageRank { damping, iterations } => write!(f, "pagerank:{damping}:{iterations}"),
        }
    }
}

impl FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let head = parts.next().unwrap_or("");
        let kind = match head {
            "unit" => WeightKind::Unit,
            "degree" => WeightKind::Degree,
            "nbrdeg" => WeightKind::NeighborDegreeSum,
            "pagerank" => {
                let damping = match parts.next() {
                    Some(t) => t
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad pagerank damping `{t}`")))?,
                    None => 0.85,
                };
                let iterations = match parts.next() {
                    Some(t) => t
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad pagerank iteration count `{t}`")))?,
                    None => 30,
                };
                WeightKind::PageRank { damping, iterations }
            }
            other => return Err(Error::Invalid(format!("unknown weight function `{other}`"))),
        };
        if parts.next().is_some() {
            return Err(Error::Invalid(format!("too many parameters in weight token `{s}`")));
        }
        Ok(kind)
    }
}

/// Comma-separated list of weight functions.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSpec(pub Vec<WeightKind>);

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kinds = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        if kinds.is_empty() {
            return Err(Error::Invalid("empty weight spec".into()));
        }
        Ok(WeightSpec(kinds))
    }
}

impl WeightSpec {
    pub fn build(&self, g: &Graph) -> Result<WeightSet> {
        let mut ws = WeightSet::new(g.n());
        for kind in &self.0 {
            ws.push(kind.to_string(), kind.build(g)?)?;
        }
        Ok(ws)
    }
}

/// Reads `external_id w1 ... wd` lines; every graph vertex must appear once.
pub fn load_weights<R: BufRead>(reader: R, g: &Graph, source_name: &str) -> Result<WeightSet> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut seen = vec![false; g.n()];
    let mut d: Option<usize> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let lineno = lineno + 1;
        let mut tokens = trimmed.split_whitespace();
        let id_tok = tokens.next().unwrap();
        let id: u64 = id_tok
            .parse()
            .map_err(|_| Error::parse(source_name, lineno, format!("bad vertex id `{id_tok}`")))?;
        let values = tokens
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::parse(source_name, lineno, format!("bad weight `{t}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        match d {
            None => {
                if values.is_empty() {
                    return Err(Error::parse(source_name, lineno, "no weight columns"));
                }
                d = Some(values.len());
                rows = vec![vec![0.0; g.n()]; values.len()];
            }
            Some(d) if d != values.len() => {
                return Err(Error::parse(
                    source_name,
                    lineno,
                    format!("expected {d} weight columns, found {}", values.len()),
                ))
            }
            _ => {}
        }
        let v = g
            .index_of(id)
            .ok_or_else(|| Error::parse(source_name, lineno, format!("vertex {id} is not in the graph")))?;
        if seen[v] {
            return Err(Error::parse(source_name, lineno, format!("vertex {id} listed twice")));
        }
        seen[v] = true;
        for (j, &w) in values.iter().enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::parse(
                    source_name,
                    lineno,
                    format!("weight {w} in column {} is not positive", j + 1),
                ));
            }
            rows[j][v] = w;
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(Error::Invalid(format!(
            "{source_name}: vertex {} has no weights",
            g.external_id(v)
        )));
    }
    let rows = rows
        .into_iter()
        .enumerate()
        .map(|(j, r)| (format!("w{}", j + 1), r))
        .collect();
    WeightSet::from_rows(rows)
}

/// Writes one line per vertex, sorted by external id, with round-trip exact
/// float formatting.
pub fn save_weights<W: Write>(ws: &WeightSet, g: &Graph, mut out: W) -> Result<()> {
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by_key(|&v| g.external_id(v));
    for v in order {
        write!(out, "{}", g.external_id(v))?;
        for row in ws.rows() {
            write!(out, "\t{}", row[v])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_edge_list_str;
    use proptest::prelude::*;

    fn path3() -> Graph {
        Graph::from_index_edges(3, &[(0, 1), (1, 2)])
    }

    fn star3() -> Graph {
        Graph::from_index_edges(4, &[(0, 1), (0, 2), (0, 3)])
    }

    fn complete(n: usize) -> Graph {
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v));
            }
        }
        Graph::from_index_edges(n, &e)
    }

    #[test]
    fn unit_rows() {
        assert_eq!(unit_weights(3).unwrap(), vec![1.0; 3]);
        assert_eq!(unit_weights(1).unwrap(), vec![1.0]);
        assert!(unit_weights(0).is_err());
        let mut ws = WeightSet::new(3);
        ws.push("unit", unit_weights(3).unwrap()).unwrap();
        assert_eq!(ws.d(), 1);
        assert_eq!(ws.total(0), 3.0);
        ws.push("unit2", unit_weights(3).unwrap()).unwrap();
        assert_eq!(ws.d(), 2);
    }

    #[test]
    fn degree_rows() {
        let w = degree_weights(&path3()).unwrap();
        assert_eq!(w, vec![1.0, 2.0, 1.0]);
        assert_eq!(w.iter().sum::<f64>(), 4.0);
        assert_eq!(degree_weights(&complete(4)).unwrap(), vec![3.0; 4]);
        let (g, _) = load_edge_list_str("0 1\n5 5\n").unwrap();
        match degree_weights(&g).unwrap_err() {
            Error::NonPositiveWeight { vertex, .. } => assert_eq!(vertex, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn neighbor_degree_rows() {
        assert_eq!(neighbor_degree_sum_weights(&path3()).unwrap(), vec![2.0; 3]);
        assert_eq!(neighbor_degree_sum_weights(&complete(3)).unwrap(), vec![4.0; 3]);
        assert_eq!(neighbor_degree_sum_weights(&star3()).unwrap(), vec![3.0; 4]);
    }

    #[test]
    fn pagerank_symmetric_cases() {
        let c4 = Graph::from_index_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        for d in [0.5, 0.85] {
            for r in pagerank_weights(&c4, d, 30).unwrap() {
                assert!((r - 0.25).abs() < 1e-12);
            }
        }
        let edge = Graph::from_index_edges(2, &[(0, 1)]);
        for r in pagerank_weights(&edge, 0.85, 30).unwrap() {
            assert!((r - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn pagerank_star_fixed_point() {
        // Fixed point of c = 0.0375 + 2.55·l, l = 0.0375 + (0.85/3)·c.
        let leaf = 0.048125 / (1.0 - 0.85 * 0.85);
        let center = 0.0375 + 2.55 * leaf;
        let r = pagerank_weights(&star3(), 0.85, 300).unwrap();
        assert!((r[0] - center).abs() < 1e-9);
        assert!((center - 0.4797).abs() < 1e-4);
        for &l in &r[1..] {
            assert!((l - leaf).abs() < 1e-9);
        }
        assert!((leaf - 0.1734).abs() < 1e-4);
        // The bipartite star oscillates, so 30 iterations are only close.
        let r30 = pagerank_weights(&star3(), 0.85, 30).unwrap();
        assert!((r30[0] - center).abs() < 5e-3);
        assert!((r30.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pagerank_rejects_bad_inputs() {
        assert!(pagerank_weights(&path3(), 1.0, 30).is_err());
        assert!(pagerank_weights(&path3(), 0.85, 0).is_err());
        let (g, _) = load_edge_list_str("0 1\n2 2\n").unwrap();
        assert!(pagerank_weights(&g, 0.85, 30).is_err());
    }

    #[test]
    fn spec_grammar() {
        let spec: WeightSpec = "unit,degree,nbrdeg,pagerank,pagerank:0.5,pagerank:0.9:10".parse().unwrap();
        assert_eq!(spec.0.len(), 6);
        assert_eq!(spec.0[3], WeightKind::PageRank { damping: 0.85, iterations: 30 });
        assert_eq!(spec.0[5], WeightKind::PageRank { damping: 0.9, iterations: 10 });
        assert!("unit,bogus".parse::<WeightSpec>().is_err());
        assert!("".parse::<WeightSpec>().is_err());
        assert!("pagerank:x".parse::<WeightSpec>().is_err());
        let ws = "unit,degree".parse::<WeightSpec>().unwrap().build(&path3()).unwrap();
        assert_eq!(ws.labels(), &["unit".to_string(), "degree".to_string()]);
        assert_eq!(ws.totals(), &[3.0, 4.0]);
    }

    #[test]
    fn load_tsv() {
        let g = Graph::from_index_edges(2, &[(0, 1)]);
        let ws = load_weights("0 1.0 2.0\n1 1.0 3.0".as_bytes(), &g, "w").unwrap();
        assert_eq!(ws.d(), 2);
        assert_eq!(ws.totals(), &[2.0, 5.0]);
        let err = load_weights("0 1.0 0.0\n1 1.0 3.0".as_bytes(), &g, "w").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(load_weights("0 1.0 2.0\n".as_bytes(), &g, "w").is_err());
        assert!(load_weights("0 1.0\n1 1.0 3.0\n".as_bytes(), &g, "w").is_err());
        assert!(load_weights("0 1.0\n7 1.0\n".as_bytes(), &g, "w").is_err());
    }

    #[test]
    fn restrict_recomputes_totals() {
        let ws = "unit,degree".parse::<WeightSpec>().unwrap().build(&path3()).unwrap();
        let sub = ws.restrict(&[1, 2]);
        assert_eq!(sub.n(), 2);
        assert_eq!(sub.totals(), &[2.0, 3.0]);
    }

    proptest! {
        #[test]
        fn save_load_identity(rows in (1usize..20, 1usize..4).prop_flat_map(|(n, d)| {
            proptest::collection::vec(proptest::collection::vec(1e-6f64..1e6, n), d)
        })) {
            let n = rows[0].len();
            let g = Graph::from_index_edges(n, &[]);
            let ws = WeightSet::from_rows(rows.into_iter().enumerate().map(|(j, r)| (format!("w{}", j + 1), r)).collect()).unwrap();
            let mut buf = Vec::new();
            save_weights(&ws, &g, &mut buf).unwrap();
            let back = load_weights(buf.as_slice(), &g, "buf").unwrap();
            prop_assert_eq!(back, ws);
        }

        #[test]
        fn totals_match_rows(row in proptest::collection::vec(1e-3f64..1e3, 1..100)) {
            let mut ws = WeightSet::new(row.len());
            ws.push("w", row.clone()).unwrap();
            let s: f64 = row.iter().sum();
            prop_assert!((ws.total(0) - s).abs() <= 1e-12 * s);
        }
    }
}
