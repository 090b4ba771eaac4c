//! Partition quality measures.

use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::partition::Partition;
use crate::weights::WeightSet;

fn check_cover(n: usize, p: &Partition) {
    assert_eq!(
        p.assignment().len(),
        n,
        "partition covers {} vertices but the graph has {n}",
        p.assignment().len()
    );
}

/// Edges whose endpoints share a part.
pub fn uncut_edges(g: &Graph, p: &Partition) -> usize {
    check_cover(g.n(), p);
    let a = p.assignment();
    g.edges().filter(|&(u, v)| a[u] == a[v]).count()
}

pub fn cut_size(g: &Graph, p: &Partition) -> usize {
    g.m() - uncut_edges(g, p)
}

/// Fraction of uncut edges; `1.0` for a graph without edges.
pub fn edge_locality(g: &Graph, p: &Partition) -> f64 {
    if g.m() == 0 {
        check_cover(g.n(), p);
        return 1.0;
    }
    uncut_edges(g, p) as f64 / g.m() as f64
}

/// Per-dimension `max_i w(Vᵢ) / (W/k) - 1`.
pub fn imbalance(ws: &WeightSet, p: &Partition) -> Vec<f64> {
    check_cover(ws.n(), p);
    let k = p.k();
    let a = p.assignment();
    ws.rows()
        .iter()
        .zip(ws.totals())
        .map(|(row, &total)| {
            let mut mass = vec![0.0; k];
            for (&part, &w) in a.iter().zip(row) {
                mass[part as usize] += w;
            }
            let heaviest = mass.iter().copied().fold(0.0, f64::max);
            heaviest / (total / k as f64) - 1.0
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionImbalance {
    pub label: String,
    pub imbalance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub locality: f64,
    pub cut_edges: usize,
    pub imbalance: Vec<DimensionImbalance>,
}

impl MetricsReport {
    pub fn compute(g: &Graph, ws: &WeightSet, p: &Partition) -> MetricsReport {
        Self::compute_on(g, ws, p, None)
    }

    /// Like [`MetricsReport::compute`], but `ws` covers only the vertices
    /// listed in `balanced` (indices into `p`).
    pub fn compute_on(g: &Graph, ws: &WeightSet, p: &Partition, balanced: Option<&[usize]>) -> MetricsReport {
        let cut = cut_size(g, p);
        let locality = edge_locality(g, p);
        let values = match balanced {
            Some(members) => imbalance(ws, &p.restrict(members)),
            None => imbalance(ws, p),
        };
        MetricsReport {
            n: g.n(),
            m: g.m(),
            k: p.k(),
            locality,
            cut_edges: cut,
            imbalance: ws
                .labels()
                .iter()
                .zip(values)
                .map(|(label, imbalance)| DimensionImbalance {
                    label: label.clone(),
                    imbalance,
                })
                .collect(),
        }
    }

    pub fn max_imbalance(&self) -> f64 {
        self.imbalance.iter().map(|d| d.imbalance).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics report serializes")
    }
}
