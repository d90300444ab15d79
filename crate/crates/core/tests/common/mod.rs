#![allow(dead_code)]

use dendrograph::metrics::cost_j;
use dendrograph::{Dendrogram, NodeId, NodePrior, ScoreReport, WeightedGraph};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

/// Random connected graph: a random spanning tree plus `extra` random
/// edges, weights uniform in `[0.1, 10)`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, extra: usize) -> WeightedGraph {
    let mut edges = Vec::with_capacity(n + extra);
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v, rng.gen_range(0.1..10.0)));
    }
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((u, v, rng.gen_range(0.1..10.0)));
        }
    }
    WeightedGraph::from_edges(labels(n), edges).unwrap()
}

/// Random connected graph with small integer weights, so linkage ties occur.
pub fn tied_graph<R: Rng>(rng: &mut R, n: usize, extra: usize) -> WeightedGraph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v, 1.0));
    }
    for _ in 0..extra {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            edges.push((u, v, rng.gen_range(1..3) as f64));
        }
    }
    WeightedGraph::from_edges(labels(n), edges).unwrap()
}

/// Copy of `g` with every weight multiplied by `1 + U(-eps, eps)`.
pub fn jittered<R: Rng>(rng: &mut R, g: &WeightedGraph, eps: f64) -> WeightedGraph {
    let edges: Vec<_> = g.edges().iter().map(|&(u, v, w)| (u, v, w * (1.0 + rng.gen_range(-eps..eps)))).collect();
    WeightedGraph::from_edges(g.labels().to_vec(), edges).unwrap()
}

/// Random tree shape in which every internal node joins two sets with an
/// edge between them, so optimal heights exist. Heights are placeholders.
pub fn random_shape<R: Rng>(rng: &mut R, g: &WeightedGraph) -> Dendrogram {
    let n = g.n();
    let mut owner: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<NodeId>> = (0..n).map(|u| vec![u]).collect();
    let mut pairs = Vec::with_capacity(n - 1);
    let edges = g.edges();
    while pairs.len() < n - 1 {
        let crossing: Vec<_> = edges.iter().filter(|&&(u, v, _)| owner[u] != owner[v]).collect();
        let &&(u, v, _) = crossing.choose(rng).unwrap();
        let (a, b) = (owner[u], owner[v]);
        let moved = std::mem::take(&mut members[b]);
        for &x in &moved {
            owner[x] = a;
        }
        members[a].extend(moved);
        pairs.push((u, v, (pairs.len() + 1) as f64));
    }
    Dendrogram::from_leaf_pairs(g.labels().to_vec(), &pairs).unwrap()
}

pub fn priors(g: &WeightedGraph) -> [NodePrior; 2] {
    [NodePrior::degree(g), NodePrior::uniform(g.n())]
}

/// `Σ p(A,B) log(p(A,B) / 2π(A)π(B))` evaluated straight from node pairs,
/// for a tree given as a list of `(A, B)` leaf sets.
pub fn brute_objective(g: &WeightedGraph, prior: &NodePrior, nodes: &[(Vec<NodeId>, Vec<NodeId>)]) -> f64 {
    let mut total = 0.0;
    for (a, b) in nodes {
        let mut p = 0.0;
        for &u in a {
            for &v in b {
                p += 2.0 * g.weight(u, v) / g.total_weight();
            }
        }
        let q = 2.0 * a.iter().map(|&u| prior.get(u)).sum::<f64>() * b.iter().map(|&v| prior.get(v)).sum::<f64>();
        if p > 0.0 {
            total += p * (p / q).ln();
        }
    }
    total
}

/// `J` at the best heights for `tree`. A node no edge crosses has its
/// optimum at infinite height; a very large finite height stands in.
pub fn best_cost_j(g: &WeightedGraph, prior: &NodePrior, tree: &Dendrogram) -> f64 {
    let nodes = ScoreReport::compute(g, prior, tree).unwrap().internal_nodes;
    let heights: Vec<f64> = nodes.iter().map(|x| if x.p > 0.0 { x.q / x.p } else { 1e15 }).collect();
    cost_j(g, prior, &tree.with_heights(&heights).unwrap()).unwrap()
}
