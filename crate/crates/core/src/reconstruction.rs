//! Decoding a dendrogram back into a graph.
//!
//! Given heights `d` and a prior `π`, the decoded graph is complete with
//! weights `ŵ(u,v) = π(u) π(v) / d(u,v)` for `u ≠ v` and no self-loops.

use std::fmt::Write as _;

use crate::dendrogram::Dendrogram;
use crate::graph::{NodeId, NodePrior};
use crate::metrics::MetricsError;

/// Dense decoded graph. Only the upper triangle is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedGraph {
    labels: Vec<String>,
    // row-major upper triangle, u < v
    weights: Vec<f64>,
    total: f64,
}

impl ReconstructedGraph {
    pub fn new(d: &Dendrogram, prior: &NodePrior) -> Result<Self, MetricsError> {
        let n = d.n_leaves();
        if prior.len() != n {
            return Err(MetricsError::SizeMismatch { graph: n, other: prior.len(), what: "prior" });
        }
        let dist = d.ultrametric_matrix();
        let mut weights = Vec::with_capacity(n * (n - 1) / 2);
        for u in 0..n {
            for v in u + 1..n {
                weights.push(prior.get(u) * prior.get(v) / dist[u * n + v]);
            }
        }
        // ordered pairs, both directions
        let total = 2.0 * weights.iter().sum::<f64>();
        Ok(ReconstructedGraph { labels: d.labels().to_vec(), weights, total })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn index(&self, u: NodeId, v: NodeId) -> usize {
        let (u, v) = if u < v { (u, v) } else { (v, u) };
        let n = self.n();
        u * (2 * n - u - 1) / 2 + (v - u - 1)
    }

    /// `ŵ(u, v)`, zero on the diagonal.
    pub fn weight(&self, u: NodeId, v: NodeId) -> f64 {
        if u == v {
            0.0
        } else {
            self.weights[self.index(u, v)]
        }
    }

    /// `Σ_{u ≠ v} ŵ(u, v)` over ordered pairs.
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    /// `p̂(u, v) = ŵ(u, v) / ŵ`.
    pub fn probability(&self, u: NodeId, v: NodeId) -> f64 {
        self.weight(u, v) / self.total
    }

    /// Edge list of all pairs with `ŵ ≥ threshold`, weights rounded to 12
    /// significant digits. Readable by the graph parser.
    pub fn export_edge_list(&self, threshold: f64) -> String {
        let n = self.n();
        let mut out = String::new();
        for u in 0..n {
            for v in u + 1..n {
                let w = self.weight(u, v);
                if w >= threshold {
                    let _ = writeln!(out, "{} {} {}", self.labels[u], self.labels[v], round_significant(w, 12));
                }
            }
        }
        out
    }
}

/// Rounds to `digits` significant decimal digits; the result prints in
/// shortest form.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}
