//! Undirected simple graphs in compressed adjacency (CSR) form.
//!
//! Vertices carry arbitrary 64-bit external ids which are remapped to dense
//! internal indices `0..n` in ascending id order. Every file this crate writes
//! uses the external ids.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Chunk size for the parallel `A·x` product.
const SPMV_CHUNK: usize = 4096;

#[derive(Clone, Debug, Default)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    ids: Vec<u64>,
    index: HashMap<u64, usize>,
}

/// Side information produced while building a graph from raw edges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

/// An induced subgraph together with the parent index of each of its vertices.
#[derive(Clone, Debug)]
pub struct Subgraph {
    pub graph: Graph,
    pub parent: Vec<usize>,
}

impl Graph {
    /// Builds a graph from undirected edges given by external ids.
    ///
    /// Both orientations and repeated edges collapse to one edge; self-loops
    /// are dropped. Vertices that only occur in self-loops are still kept.
    pub fn from_edges<I>(edges: I) -> (Graph, LoadStats)
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut raw: Vec<(u64, u64)> = Vec::new();
        let mut ids: Vec<u64> = Vec::new();
        let mut stats = LoadStats::default();
        for (u, v) in edges {
            ids.push(u);
            ids.push(v);
            if u == v {
                stats.self_loops += 1;
            } else {
                raw.push((u.min(v), u.max(v)));
            }
        }
        ids.sort_unstable();
        ids.dedup();
        let index: HashMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();

        let mut pairs: Vec<(u32, u32)> = raw
            .iter()
            .map(|&(u, v)| (index[&u] as u32, index[&v] as u32))
            .collect();
        pairs.sort_unstable();
        let before = pairs.len();
        pairs.dedup();
        stats.duplicate_edges = before - pairs.len();

        let graph = Self::from_dedup_pairs(ids, index, &pairs);
        (graph, stats)
    }

    /// Builds a graph on internal indices `0..n` whose external ids are the
    /// indices themselves.
    pub fn from_index_edges(n: usize, edges: &[(usize, usize)]) -> Graph {
        let ids: Vec<u64> = (0..n as u64).collect();
        let index = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut pairs: Vec<(u32, u32)> = edges
            .iter()
            .filter(|(u, v)| u != v)
            .map(|&(u, v)| {
                assert!(u < n && v < n, "edge ({u}, {v}) out of range for n = {n}");
                (u.min(v) as u32, u.max(v) as u32)
            })
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        Self::from_dedup_pairs(ids, index, &pairs)
    }

    fn from_dedup_pairs(ids: Vec<u64>, index: HashMap<u64, usize>, pairs: &[(u32, u32)]) -> Graph {
        let n = ids.len();
        let mut degree = vec![0usize; n];
        for &(u, v) in pairs {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; 2 * pairs.len()];
        for &(u, v) in pairs {
            neighbors[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        // Pairs are sorted, so each adjacency list is built in order except for
        // the interleaving of the two orientations.
        for u in 0..n {
            neighbors[offsets[u]..offsets[u + 1]].sort_unstable();
        }
        Graph {
            offsets,
            neighbors,
            ids,
            index,
        }
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    /// Number of undirected edges.
    pub fn m(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|v| self.degree(v)).collect()
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn external_id(&self, v: usize) -> u64 {
        self.ids[v]
    }

    pub fn external_ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Iterates every undirected edge once as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn isolated_vertices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.degree(v) == 0).collect()
    }

    /// `out[i] = Σ_{j ∈ adj(i)} x[j]`.
    pub fn adjacency_multiply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        self.adjacency_multiply_into(x, &mut out);
        out
    }

    /// In-place `A·x`. Output rows are split into fixed chunks, so the result
    /// is identical for any thread count.
    pub fn adjacency_multiply_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n(), "vector length does not match vertex count");
        assert_eq!(out.len(), self.n(), "output length does not match vertex count");
        out.par_chunks_mut(SPMV_CHUNK)
            .enumerate()
            .for_each(|(chunk, rows)| {
                let base = chunk * SPMV_CHUNK;
                for (r, slot) in rows.iter_mut().enumerate() {
                    *slot = self.neighbors(base + r).iter().map(|&j| x[j as usize]).sum();
                }
            });
    }

    /// The subgraph induced by `members`, keeping the parent's external ids.
    pub fn induced_subgraph(&self, members: &[usize]) -> Subgraph {
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in members.iter().enumerate() {
            assert!(v < self.n(), "member {v} out of range for n = {}", self.n());
            local[v] = i;
        }
        let ids: Vec<u64> = members.iter().map(|&v| self.ids[v]).collect();
        let index = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut pairs = Vec::new();
        for (i, &v) in members.iter().enumerate() {
            for &u in self.neighbors(v) {
                let j = local[u as usize];
                if j != usize::MAX && i < j {
                    pairs.push((i as u32, j as u32));
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        Subgraph {
            graph: Self::from_dedup_pairs(ids, index, &pairs),
            parent: members.to_vec(),
        }
    }

    /// Writes the graph as an edge list of external ids. Isolated vertices are
    /// written as self-loops so a reload keeps them.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for v in self.isolated_vertices() {
            writeln!(out, "{} {}", self.ids[v], self.ids[v])?;
        }
        for (u, v) in self.edges() {
            writeln!(out, "{}\t{}", self.ids[u], self.ids[v])?;
        }
        Ok(())
    }
}

/// Parses a whitespace-separated edge list; lines starting with `#` or `%`
/// and blank lines are skipped.
pub fn load_edge_list<R: BufRead>(reader: R, source_name: &str) -> Result<(Graph, LoadStats)> {
    let mut edges = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut next = |what: &str| -> Result<u64> {
            let tok = tokens
                .next()
                .ok_or_else(|| Error::parse(source_name, lineno + 1, format!("missing {what} vertex id")))?;
            tok.parse::<u64>().map_err(|_| {
                Error::parse(source_name, lineno + 1, format!("`{tok}` is not a non-negative integer id"))
            })
        };
        let u = next("source")?;
        let v = next("target")?;
        edges.push((u, v));
    }
    Ok(Graph::from_edges(edges))
}

pub fn load_edge_list_str(text: &str) -> Result<(Graph, LoadStats)> {
    load_edge_list(text.as_bytes(), "<string>")
}
