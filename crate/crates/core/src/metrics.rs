//! Quality functionals for dendrograms and partitions of a graph.
//!
//! Cluster-level masses follow one convention throughout: for the internal
//! node joining `A` and `B`,
//!
//! * `p(A,B) = 2 w(A,B) / w` counts edge-sampled pairs in both orders,
//! * `q(A,B) = 2 π(A) π(B)` counts prior-sampled pairs in both orders.
//!
//! With it the cost `J(d)` summed per internal node equals the cost summed
//! over node pairs, and the optimal heights `h = q / p` give
//! `J = -Σ p log(p/q)`, minus the tree objective. All logarithms are natural,
//! so values are in nats.

use serde::Serialize;
use thiserror::Error;

use crate::clustering::{linkage_similarity, pair_key, ranks_above};
use crate::dendrogram::{Dendrogram, DendrogramError, Partition};
use crate::graph::{NodeId, NodePrior, WeightedGraph};
use crate::reconstruction::ReconstructedGraph;

/// Absolute tolerance of the `J(d*) = -objective` identity.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("graph has {graph} nodes but the {what} covers {other}")]
    SizeMismatch { graph: usize, other: usize, what: &'static str },
    #[error("internal node {node} separates sets with no edge between them; no finite height represents it")]
    UnrepresentableTree { node: usize },
    #[error("need at least two blocks to merge")]
    SingleBlock,
    #[error("resolution must be non-negative, got {0}")]
    NegativeResolution(f64),
    #[error(transparent)]
    Dendrogram(#[from] DendrogramError),
}

/// Masses of one internal node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeMasses {
    /// Tree node id (`n + k` for the `k`-th merge).
    pub node: usize,
    pub p: f64,
    pub q: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy)]
struct InternalNode {
    p: f64,
    pi_left: f64,
    pi_right: f64,
    size_left: usize,
    size_right: usize,
    height: f64,
}

impl InternalNode {
    fn q(&self) -> f64 {
        2.0 * self.pi_left * self.pi_right
    }
}

fn check_sizes(g: &WeightedGraph, prior: &NodePrior, d: &Dendrogram) -> Result<(), MetricsError> {
    if prior.len() != g.n() {
        return Err(MetricsError::SizeMismatch { graph: g.n(), other: prior.len(), what: "prior" });
    }
    if d.n_leaves() != g.n() {
        return Err(MetricsError::SizeMismatch { graph: g.n(), other: d.n_leaves(), what: "dendrogram" });
    }
    Ok(())
}

/// Cross mass and prior masses of every internal node, in merge order.
fn internal_nodes(g: &WeightedGraph, prior: &NodePrior, d: &Dendrogram) -> Result<Vec<InternalNode>, MetricsError> {
    check_sizes(g, prior, d)?;
    let n = g.n();
    let mut pi = vec![0.0; 2 * n - 1];
    pi[..n].copy_from_slice(prior.values());
    let mut nodes = Vec::with_capacity(n - 1);
    for (k, m) in d.merges().iter().enumerate() {
        pi[n + k] = pi[m.left] + pi[m.right];
        nodes.push(InternalNode {
            p: 0.0,
            pi_left: pi[m.left],
            pi_right: pi[m.right],
            size_left: d.size(m.left),
            size_right: d.size(m.right),
            height: m.height,
        });
    }
    let w = g.total_weight();
    for &(u, v, weight) in g.edges() {
        nodes[d.lca(u, v) - n].p += 2.0 * weight / w;
    }
    Ok(nodes)
}

/// `J(d) = Σ p(A,B) log d(A,B) + log Σ q(A,B) / d(A,B)`, summed over
/// internal nodes. Invariant under scaling all heights.
pub fn cost_j(g: &WeightedGraph, prior: &NodePrior, d: &Dendrogram) -> Result<f64, MetricsError> {
    let nodes = internal_nodes(g, prior, d)?;
    let first: f64 = nodes.iter().filter(|x| x.p > 0.0).map(|x| x.p * x.height.ln()).sum();
    let second: f64 = nodes.iter().map(|x| x.q() / x.height).sum();
    Ok(first + second.ln())
}

/// `J(d)` from its definition over ordered node pairs, `O(n²)`.
pub fn cost_j_pairwise(g: &WeightedGraph, prior: &NodePrior, d: &Dendrogram) -> Result<f64, MetricsError> {
    check_sizes(g, prior, d)?;
    let n = g.n();
    let dist = d.ultrametric_matrix();
    let w = g.total_weight();
    let first: f64 = g.edges().iter().map(|&(u, v, weight)| 2.0 * weight / w * dist[u * n + v].ln()).sum();
    let mut second = 0.0;
    for u in 0..n {
        for v in 0..n {
            if u != v {
                second += prior.get(u) * prior.get(v) / dist[u * n + v];
            }
        }
    }
    Ok(first + second.ln())
}

/// A tree with closed-form optimal heights.
#[derive(Debug, Clone)]
pub struct OptimalHeights {
    pub dendrogram: Dendrogram,
    /// False when some node ends up below one of its children. Greedy trees
    /// are always regular; arbitrary shapes need not be.
    pub regular: bool,
}

/// Replaces every height of `tree` by `q(A,B) / p(A,B)`, the minimizer of
/// `J` for that tree (up to a common factor, fixed to one).
pub fn optimal_heights(g: &WeightedGraph, prior: &NodePrior, tree: &Dendrogram) -> Result<OptimalHeights, MetricsError> {
    let nodes = internal_nodes(g, prior, tree)?;
    let n = g.n();
    let mut heights = Vec::with_capacity(nodes.len());
    for (k, x) in nodes.iter().enumerate() {
        if x.p <= 0.0 {
            return Err(MetricsError::UnrepresentableTree { node: n + k });
        }
        heights.push(x.q() / x.p);
    }
    let dendrogram = tree.with_heights(&heights)?;
    let regular = dendrogram.is_regular();
    Ok(OptimalHeights { dendrogram, regular })
}

/// `Σ p(A,B) log(p(A,B) / q(A,B))` over internal nodes; to be maximized.
/// Nodes without crossing edges contribute zero.
pub fn tree_objective(g: &WeightedGraph, prior: &NodePrior, tree: &Dendrogram) -> Result<f64, MetricsError> {
    let nodes = internal_nodes(g, prior, tree)?;
    Ok(nodes.iter().filter(|x| x.p > 0.0).map(|x| x.p * (x.p / x.q()).ln()).sum())
}

/// `D(p || p̂)` between the graph's pair distribution and the one decoded
/// from `(d, π)`.
pub fn kl_reconstruction(g: &WeightedGraph, prior: &NodePrior, d: &Dendrogram) -> Result<f64, MetricsError> {
    let nodes = internal_nodes(g, prior, d)?;
    let decoded_total: f64 = nodes.iter().map(|x| x.q() / x.height).sum();
    let w = g.total_weight();
    let mut kl = 0.0;
    for &(u, v, weight) in g.edges() {
        let p = weight / w;
        let p_hat = prior.get(u) * prior.get(v) / d.height(d.lca(u, v)) / decoded_total;
        kl += 2.0 * p * (p / p_hat).ln();
    }
    Ok(kl)
}

/// Same divergence, computed against a dense [`ReconstructedGraph`].
pub fn kl_against(g: &WeightedGraph, decoded: &ReconstructedGraph) -> Result<f64, MetricsError> {
    if decoded.n() != g.n() {
        return Err(MetricsError::SizeMismatch { graph: g.n(), other: decoded.n(), what: "reconstruction" });
    }
    let w = g.total_weight();
    Ok(g.edges()
        .iter()
        .map(|&(u, v, weight)| {
            let p = weight / w;
            2.0 * p * (p / decoded.probability(u, v)).ln()
        })
        .sum())
}

/// `Σ_{u≠v} p(u,v) log(p(u,v) / (π(u) π(v)))`, the tree-independent part of
/// the reconstruction divergence at optimal heights.
pub fn graph_prior_divergence(g: &WeightedGraph, prior: &NodePrior) -> Result<f64, MetricsError> {
    if prior.len() != g.n() {
        return Err(MetricsError::SizeMismatch { graph: g.n(), other: prior.len(), what: "prior" });
    }
    let w = g.total_weight();
    Ok(g.edges()
        .iter()
        .map(|&(u, v, weight)| {
            let p = weight / w;
            2.0 * p * (p / (prior.get(u) * prior.get(v))).ln()
        })
        .sum())
}

/// Expected leaf count of the smallest cluster holding an edge-sampled
/// pair, `Σ p(A,B) (|A| + |B|)`. This is the unnormalized
/// `Σ w(u,v) |leaves(lca)|` divided by `w`.
pub fn dasgupta_cost(g: &WeightedGraph, tree: &Dendrogram) -> Result<f64, MetricsError> {
    let prior = NodePrior::uniform(g.n());
    let nodes = internal_nodes(g, &prior, tree)?;
    Ok(nodes.iter().map(|x| x.p * (x.size_left + x.size_right) as f64).sum())
}

/// `(Σ p(A,B) (log π(A) + log π(B)), Σ p(A,B) (π(A) + π(B)))`: the log
/// cost and the prior-weighted Dasgupta cost.
pub fn generalized_costs(g: &WeightedGraph, prior: &NodePrior, tree: &Dendrogram) -> Result<(f64, f64), MetricsError> {
    let nodes = internal_nodes(g, prior, tree)?;
    let log_cost = nodes.iter().map(|x| x.p * (x.pi_left.ln() + x.pi_right.ln())).sum();
    let weighted = nodes.iter().map(|x| x.p * (x.pi_left + x.pi_right)).sum();
    Ok((log_cost, weighted))
}

fn block_index(g: &WeightedGraph, partition: &Partition) -> Result<Vec<usize>, MetricsError> {
    let covered: usize = partition.blocks().iter().map(Vec::len).sum();
    if covered != g.n() {
        return Err(MetricsError::SizeMismatch { graph: g.n(), other: covered, what: "partition" });
    }
    let mut owner = vec![usize::MAX; g.n()];
    for (i, block) in partition.blocks().iter().enumerate() {
        for &u in block {
            if u >= g.n() || owner[u] != usize::MAX {
                return Err(DendrogramError::InvalidPartition(format!("node {u} misplaced")).into());
            }
            owner[u] = i;
        }
    }
    Ok(owner)
}

/// Modularity at resolution `gamma`:
/// `Σ_C Σ_{u,v ∈ C} (p(u,v) - γ π(u) π(v))`, diagonal terms included.
pub fn modularity(g: &WeightedGraph, prior: &NodePrior, partition: &Partition, gamma: f64) -> Result<f64, MetricsError> {
    if !(gamma >= 0.0) {
        return Err(MetricsError::NegativeResolution(gamma));
    }
    if prior.len() != g.n() {
        return Err(MetricsError::SizeMismatch { graph: g.n(), other: prior.len(), what: "prior" });
    }
    let owner = block_index(g, partition)?;
    let w = g.total_weight();
    let intra: f64 = g
        .edges()
        .iter()
        .filter(|&&(u, v, _)| owner[u] == owner[v])
        .map(|&(_, _, weight)| 2.0 * weight / w)
        .sum();
    let penalty: f64 = partition.blocks().iter().map(|b| prior.mass(b).powi(2)).sum();
    Ok(intra - gamma * penalty)
}

/// Largest linkage between two blocks of a partition: the resolution above
/// which no merge of these blocks increases modularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxResolution {
    pub value: f64,
    /// Block indices, `pair.0 < pair.1`.
    pub pair: (usize, usize),
}

/// Ties are broken exactly as in the greedy agglomeration: towards the pair
/// whose smallest members, ascending, are lexicographically smallest.
pub fn max_resolution(g: &WeightedGraph, prior: &NodePrior, partition: &Partition) -> Result<MaxResolution, MetricsError> {
    let k = partition.len();
    if k < 2 {
        return Err(MetricsError::SingleBlock);
    }
    let owner = block_index(g, partition)?;
    let w = g.total_weight();
    let mut cross = vec![0.0; k * k];
    for &(u, v, weight) in g.edges() {
        let (a, b) = (owner[u], owner[v]);
        if a != b {
            cross[a.min(b) * k + a.max(b)] += 2.0 * weight / w;
        }
    }
    let mass: Vec<f64> = partition.blocks().iter().map(|b| prior.mass(b)).collect();
    let smallest: Vec<NodeId> = partition.blocks().iter().map(|b| *b.iter().min().expect("non-empty block")).collect();
    // (value, tie key, block pair)
    type Ranked = (f64, (NodeId, NodeId), (usize, usize));
    let mut best: Option<Ranked> = None;
    for i in 0..k {
        for j in i + 1..k {
            let s = linkage_similarity(cross[i * k + j], mass[i], mass[j]);
            let key = pair_key(smallest[i], smallest[j]);
            if best.is_none_or(|(bs, bkey, _)| ranks_above(s, key, bs, bkey)) {
                best = Some((s, key, (i, j)));
            }
        }
    }
    let (value, _, pair) = best.expect("at least one pair");
    Ok(MaxResolution { value, pair })
}

/// Every score of one `(graph, prior, dendrogram)` triple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    #[serde(rename = "cost_J")]
    pub cost_j: f64,
    pub tree_objective: f64,
    pub kl_reconstruction: f64,
    pub dasgupta: f64,
    pub log_cost: f64,
    pub prior_weighted_dasgupta: f64,
    pub graph_prior_divergence: f64,
    pub regular: bool,
    pub internal_nodes: Vec<NodeMasses>,
}

impl ScoreReport {
    pub fn compute(g: &WeightedGraph, prior: &NodePrior, d: &Dendrogram) -> Result<Self, MetricsError> {
        let nodes = internal_nodes(g, prior, d)?;
        let n = g.n();
        let (log_cost, prior_weighted_dasgupta) = generalized_costs(g, prior, d)?;
        Ok(ScoreReport {
            cost_j: cost_j(g, prior, d)?,
            tree_objective: tree_objective(g, prior, d)?,
            kl_reconstruction: kl_reconstruction(g, prior, d)?,
            dasgupta: dasgupta_cost(g, d)?,
            log_cost,
            prior_weighted_dasgupta,
            graph_prior_divergence: graph_prior_divergence(g, prior)?,
            regular: d.is_regular(),
            internal_nodes: nodes
                .iter()
                .enumerate()
                .map(|(k, x)| NodeMasses { node: n + k, p: x.p, q: x.q(), height: x.height })
                .collect(),
        })
    }

    /// `J + objective`, zero (up to rounding) exactly when the heights are
    /// the optimal ones.
    pub fn optimality_gap(&self) -> f64 {
        self.cost_j + self.tree_objective
    }
}
