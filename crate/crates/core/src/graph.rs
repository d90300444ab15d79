//! Weighted undirected graphs and the sampling distributions they induce.
//!
//! Edge weights define a distribution on ordered node pairs,
//! `p(u, v) = w(u, v) / w`, whose marginal is `p(u) = w(u) / w`. Every
//! cluster-level quantity in this crate is built from these two.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;

use thiserror::Error;

/// Dense node identifier, `0..n`.
pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("line {line}: expected `u v [weight]`, found {found:?}")]
    Malformed { line: usize, found: String },
    #[error("line {line}: cannot parse weight {token:?}")]
    BadWeight { line: usize, token: String },
    #[error("line {line}: weight {weight} is not strictly positive")]
    NonPositiveWeight { line: usize, weight: f64 },
    #[error("line {line}: self-loop on node {label:?}")]
    SelfLoop { line: usize, label: String },
    #[error("graph has no edges")]
    Empty,
    #[error("graph is disconnected: {a:?} cannot reach {b:?}")]
    Disconnected { a: String, b: String },
    #[error("node id {0} out of range")]
    UnknownNode(NodeId),
    #[error("clusters overlap on node {0}")]
    Overlap(NodeId),
    #[error("prior has {found} values, graph has {expected} nodes")]
    PriorLength { expected: usize, found: usize },
    #[error("prior value for node {node} is {value}; every node needs positive mass")]
    NonPositivePrior { node: NodeId, value: f64 },
    #[error("i/o error: {0}")]
    Io(String),
}

impl GraphError {
    /// Structural errors (the input parsed but the graph is unusable) as
    /// opposed to malformed input.
    pub fn is_structural(&self) -> bool {
        matches!(self, GraphError::Disconnected { .. })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Silently skip `u u` lines instead of rejecting them.
    pub drop_self_loops: bool,
}

/// Undirected weighted graph without self-loops, validated connected.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    labels: Vec<String>,
    // u < v, sorted
    edges: Vec<(NodeId, NodeId, f64)>,
    adjacency: Vec<Vec<(NodeId, f64)>>,
    node_weight: Vec<f64>,
    total_weight: f64,
}

impl WeightedGraph {
    /// Builds a graph from labelled edges. Parallel edges are summed.
    pub fn from_edges<I>(labels: Vec<String>, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let n = labels.len();
        let mut merged: HashMap<(NodeId, NodeId), f64> = HashMap::new();
        for (u, v, w) in edges {
            if u >= n {
                return Err(GraphError::UnknownNode(u));
            }
            if v >= n {
                return Err(GraphError::UnknownNode(v));
            }
            if u == v {
                return Err(GraphError::SelfLoop { line: 0, label: labels[u].clone() });
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(GraphError::NonPositiveWeight { line: 0, weight: w });
            }
            *merged.entry((u.min(v), u.max(v))).or_insert(0.0) += w;
        }
        let mut edges: Vec<_> = merged.into_iter().map(|((u, v), w)| (u, v, w)).collect();
        edges.sort_by_key(|e| (e.0, e.1));
        Self::from_sorted(labels, edges)
    }

    fn from_sorted(labels: Vec<String>, edges: Vec<(NodeId, NodeId, f64)>) -> Result<Self, GraphError> {
        if edges.is_empty() {
            return Err(GraphError::Empty);
        }
        let n = labels.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut node_weight = vec![0.0; n];
        for &(u, v, w) in &edges {
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
            node_weight[u] += w;
            node_weight[v] += w;
        }
        for row in &mut adjacency {
            row.sort_by_key(|&(v, _)| v);
        }
        let total_weight = node_weight.iter().sum();
        let graph = WeightedGraph { labels, edges, adjacency, node_weight, total_weight };
        graph.check_connected()?;
        Ok(graph)
    }

    fn check_connected(&self) -> Result<(), GraphError> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        match seen.iter().position(|&s| !s) {
            None => Ok(()),
            Some(b) => Err(GraphError::Disconnected {
                a: self.labels[0].clone(),
                b: self.labels[b].clone(),
            }),
        }
    }

    /// Parses the whitespace-separated edge-list format. Labels get dense
    /// ids in order of first appearance.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        Self::parse_with(text.as_bytes(), ParseOptions::default())
    }

    pub fn parse_with<R: BufRead>(reader: R, options: ParseOptions) -> Result<Self, GraphError> {
        let mut ids: HashMap<String, NodeId> = HashMap::new();
        let mut labels = Vec::new();
        let mut raw = Vec::new();
        for (index, line) in reader.lines().enumerate() {
            let line_no = index + 1;
            let line = line.map_err(|e| GraphError::Io(e.to_string()))?;
            let content = line.split('#').next().unwrap_or("");
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() < 2 || fields.len() > 3 {
                return Err(GraphError::Malformed { line: line_no, found: line.clone() });
            }
            let weight = match fields.get(2) {
                None => 1.0,
                Some(token) => token
                    .parse::<f64>()
                    .map_err(|_| GraphError::BadWeight { line: line_no, token: token.to_string() })?,
            };
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(GraphError::NonPositiveWeight { line: line_no, weight });
            }
            if fields[0] == fields[1] {
                if options.drop_self_loops {
                    continue;
                }
                return Err(GraphError::SelfLoop { line: line_no, label: fields[0].to_string() });
            }
            let mut id_of = |label: &str| {
                *ids.entry(label.to_string()).or_insert_with(|| {
                    labels.push(label.to_string());
                    labels.len() - 1
                })
            };
            let u = id_of(fields[0]);
            let v = id_of(fields[1]);
            raw.push((u, v, weight));
        }
        Self::from_edges(labels, raw)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, u: NodeId) -> &str {
        &self.labels[u]
    }

    pub fn node_of(&self, label: &str) -> Option<NodeId> {
        self.labels.iter().position(|l| l == label)
    }

    /// Undirected edges, each once with `u < v`, sorted.
    pub fn edges(&self) -> &[(NodeId, NodeId, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, u: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[u]
    }

    /// `w(u, v)`, zero when there is no edge.
    pub fn weight(&self, u: NodeId, v: NodeId) -> f64 {
        self.adjacency[u]
            .binary_search_by_key(&v, |&(x, _)| x)
            .map(|i| self.adjacency[u][i].1)
            .unwrap_or(0.0)
    }

    /// `w(u) = Σ_v w(u, v)`.
    pub fn node_weight(&self, u: NodeId) -> f64 {
        self.node_weight[u]
    }

    /// `w = Σ_u w(u)`, twice the sum of edge weights.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    fn check(&self, u: NodeId) -> Result<(), GraphError> {
        if u < self.n() {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(u))
        }
    }

    pub fn pair_probability(&self, u: NodeId, v: NodeId) -> Result<f64, GraphError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.weight(u, v) / self.total_weight)
    }

    pub fn node_probability(&self, u: NodeId) -> Result<f64, GraphError> {
        self.check(u)?;
        Ok(self.node_weight[u] / self.total_weight)
    }

    /// One step of the random walk: `p(v|u) = w(u, v) / w(u)`.
    pub fn transition_probability(&self, u: NodeId, v: NodeId) -> Result<f64, GraphError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.weight(u, v) / self.node_weight[u])
    }

    /// Symmetric cross mass `p(A,B) + p(B,A) = 2 w(A,B) / w` of two
    /// disjoint node sets.
    pub fn cluster_cross_mass(&self, a: &[NodeId], b: &[NodeId]) -> Result<f64, GraphError> {
        let mut side = vec![0u8; self.n()];
        for &u in a {
            self.check(u)?;
            side[u] = 1;
        }
        for &v in b {
            self.check(v)?;
            if side[v] == 1 {
                return Err(GraphError::Overlap(v));
            }
            side[v] = 2;
        }
        // summing each edge once, in node order, makes the result exactly
        // symmetric in its arguments
        let mut cross = 0.0;
        for u in (0..self.n()).filter(|&u| side[u] != 0) {
            for &(v, w) in &self.adjacency[u] {
                if v > u && side[v] != 0 && side[v] != side[u] {
                    cross += w;
                }
            }
        }
        Ok(2.0 * cross / self.total_weight)
    }

    /// `Σ_{u,v ∈ C} p(u, v)` over ordered pairs.
    pub fn intra_mass(&self, cluster: &[NodeId]) -> f64 {
        let mut inside = vec![false; self.n()];
        for &u in cluster {
            inside[u] = true;
        }
        let mut sum = 0.0;
        for &u in cluster {
            for &(v, w) in &self.adjacency[u] {
                if inside[v] {
                    sum += w;
                }
            }
        }
        sum / self.total_weight
    }
}

impl fmt::Display for WeightedGraph {
    /// Edge-list format, one undirected edge per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(u, v, w) in &self.edges {
            writeln!(f, "{} {} {}", self.labels[u], self.labels[v], w)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PriorKind {
    Uniform,
    Degree,
    Custom,
}

/// Distribution `π` over nodes, strictly positive on every node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodePrior {
    kind: PriorKind,
    values: Vec<f64>,
}

impl NodePrior {
    pub fn uniform(n: usize) -> Self {
        NodePrior { kind: PriorKind::Uniform, values: vec![1.0 / n as f64; n] }
    }

    /// `π = p`, the degree-proportional marginal.
    pub fn degree(g: &WeightedGraph) -> Self {
        let values = (0..g.n()).map(|u| g.node_weight(u) / g.total_weight()).collect();
        NodePrior { kind: PriorKind::Degree, values }
    }

    /// Normalizes arbitrary positive masses.
    pub fn custom(values: &[f64]) -> Result<Self, GraphError> {
        for (node, &value) in values.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(GraphError::NonPositivePrior { node, value });
            }
        }
        let total: f64 = values.iter().sum();
        Ok(NodePrior { kind: PriorKind::Custom, values: values.iter().map(|v| v / total).collect() })
    }

    pub fn build(g: &WeightedGraph, kind: PriorKind, custom: Option<&[f64]>) -> Result<Self, GraphError> {
        match kind {
            PriorKind::Uniform => Ok(Self::uniform(g.n())),
            PriorKind::Degree => Ok(Self::degree(g)),
            PriorKind::Custom => {
                let values = custom.unwrap_or(&[]);
                if values.len() != g.n() {
                    return Err(GraphError::PriorLength { expected: g.n(), found: values.len() });
                }
                Self::custom(values)
            }
        }
    }

    pub fn kind(&self) -> PriorKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, u: NodeId) -> f64 {
        self.values[u]
    }

    /// `π(A) = Σ_{u ∈ A} π(u)`.
    pub fn mass(&self, set: &[NodeId]) -> f64 {
        set.iter().map(|&u| self.values[u]).sum()
    }
}
