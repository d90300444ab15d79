//! Exhaustive search over binary tree shapes for small graphs.
//!
//! There are `(2n-3)!!` rooted binary trees on `n` labelled leaves. They are
//! generated by inserting leaf `k` above every node of every tree on leaves
//! `0..k`, which yields each shape once with children ordered by smallest
//! leaf. The search is capped at nine leaves (about two million shapes).

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::clustering::agglomerate_naive;
use crate::dendrogram::{Dendrogram, Merge};
use crate::graph::{NodeId, NodePrior, WeightedGraph};
use crate::metrics::{dasgupta_cost, tree_objective, MetricsError};

pub const MAX_LEAVES: usize = 9;

/// Relative tolerance under which two scores are treated as tied.
const SCORE_RTOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("exhaustive search needs 2..={MAX_LEAVES} leaves, got {n}; the number of shapes grows as (2n-3)!! = {count}")]
    OutOfRange { n: usize, count: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// `(2n-3)!!`, the number of rooted binary trees on `n` labelled leaves.
pub fn shape_count(n: usize) -> u128 {
    (2..n).map(|k| (2 * k - 1) as u128).product()
}

fn check_range(n: usize) -> Result<(), OracleError> {
    if (2..=MAX_LEAVES).contains(&n) {
        Ok(())
    } else {
        let count = if n < 2 { "undefined".to_string() } else if n <= 40 { shape_count(n).to_string() } else { "astronomical".to_string() };
        Err(OracleError::OutOfRange { n, count })
    }
}

/// Rooted binary tree without heights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeShape {
    Leaf(NodeId),
    Pair(Box<TreeShape>, Box<TreeShape>),
}

impl TreeShape {
    pub fn pair(left: TreeShape, right: TreeShape) -> Self {
        TreeShape::Pair(Box::new(left), Box::new(right))
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeShape::Leaf(_) => 1,
            TreeShape::Pair(l, r) => l.n_leaves() + r.n_leaves(),
        }
    }

    pub fn min_leaf(&self) -> NodeId {
        match self {
            TreeShape::Leaf(u) => *u,
            TreeShape::Pair(l, r) => l.min_leaf().min(r.min_leaf()),
        }
    }

    /// Same shape with children ordered by smallest leaf.
    pub fn canonical(self) -> Self {
        match self {
            TreeShape::Leaf(_) => self,
            TreeShape::Pair(l, r) => {
                let (l, r) = (l.canonical(), r.canonical());
                if l.min_leaf() <= r.min_leaf() {
                    TreeShape::pair(l, r)
                } else {
                    TreeShape::pair(r, l)
                }
            }
        }
    }

    /// Shape of a dendrogram, heights dropped.
    pub fn from_dendrogram(d: &Dendrogram) -> Self {
        fn build(d: &Dendrogram, node: usize) -> TreeShape {
            let n = d.n_leaves();
            if node < n {
                TreeShape::Leaf(node)
            } else {
                let m = d.merges()[node - n];
                TreeShape::pair(build(d, m.left), build(d, m.right))
            }
        }
        build(d, d.root()).canonical()
    }

    /// Dendrogram in post-order with each node's height set to its leaf
    /// count, which is always regular.
    pub fn to_dendrogram(&self, labels: Vec<String>) -> Result<Dendrogram, MetricsError> {
        let n = labels.len();
        let mut merges = Vec::with_capacity(n.saturating_sub(1));
        fn walk(shape: &TreeShape, n: usize, merges: &mut Vec<Merge>) -> (usize, usize) {
            match shape {
                TreeShape::Leaf(u) => (*u, 1),
                TreeShape::Pair(l, r) => {
                    let (left, sl) = walk(l, n, merges);
                    let (right, sr) = walk(r, n, merges);
                    merges.push(Merge { left, right, height: (sl + sr) as f64 });
                    (n + merges.len() - 1, sl + sr)
                }
            }
        }
        walk(self, n, &mut merges);
        Ok(Dendrogram::new(labels, merges)?)
    }

    /// Nested JSON lists of leaf ids, or of labels when given.
    pub fn to_json(&self, labels: Option<&[String]>) -> Value {
        match self {
            TreeShape::Leaf(u) => match labels {
                Some(l) => json!(l[*u]),
                None => json!(u),
            },
            TreeShape::Pair(l, r) => json!([l.to_json(labels), r.to_json(labels)]),
        }
    }
}

impl std::fmt::Display for TreeShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TreeShape::Leaf(u) => write!(f, "{u}"),
            TreeShape::Pair(l, r) => write!(f, "({l},{r})"),
        }
    }
}

/// Mutable tree used during enumeration. Node ids: leaves `0..n`,
/// internal nodes `n..`.
#[derive(Clone)]
struct Arena {
    n: usize,
    children: Vec<[usize; 2]>,
    parent: Vec<usize>,
    root: usize,
    leaves: usize,
    // enumeration stops at this many leaves
    target: usize,
}

const NONE: usize = usize::MAX;

impl Arena {
    fn two_leaves(n: usize) -> Self {
        let mut parent = vec![NONE; 2 * n - 1];
        parent[0] = n;
        parent[1] = n;
        let mut children = Vec::with_capacity(n - 1);
        children.push([0, 1]);
        Arena { n, children, parent, root: n, leaves: 2, target: n }
    }

    /// Candidate insertion points for the next leaf, in a fixed order.
    fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.leaves).chain(self.n..self.n + self.children.len())
    }

    /// Inserts the next leaf above `x`.
    fn insert(&mut self, x: usize) {
        let leaf = self.leaves;
        let y = self.n + self.children.len();
        self.children.push([x, leaf]);
        let p = self.parent[x];
        if p == NONE {
            self.root = y;
        } else {
            let slot = &mut self.children[p - self.n];
            if slot[0] == x {
                slot[0] = y;
            } else {
                slot[1] = y;
            }
        }
        self.parent[y] = p;
        self.parent[x] = y;
        self.parent[leaf] = y;
        self.leaves += 1;
    }

    fn remove_last(&mut self) {
        let y = self.n + self.children.len() - 1;
        let [x, leaf] = self.children.pop().expect("inserted node");
        let p = self.parent[y];
        if p == NONE {
            self.root = x;
        } else {
            let slot = &mut self.children[p - self.n];
            if slot[0] == y {
                slot[0] = x;
            } else {
                slot[1] = x;
            }
        }
        self.parent[x] = p;
        self.parent[leaf] = NONE;
        self.parent[y] = NONE;
        self.leaves -= 1;
    }

    fn shape(&self) -> TreeShape {
        fn build(a: &Arena, x: usize) -> TreeShape {
            if x < a.n {
                TreeShape::Leaf(x)
            } else {
                let [l, r] = a.children[x - a.n];
                TreeShape::pair(build(a, l), build(a, r))
            }
        }
        build(self, self.root)
    }

    /// Post-order merge list with leaf-count heights.
    fn merges(&self, out: &mut Vec<Merge>) {
        out.clear();
        let mut id = vec![0usize; self.n + self.children.len()];
        let mut size = vec![1usize; self.n + self.children.len()];
        let mut stack = vec![(self.root, false)];
        while let Some((x, expanded)) = stack.pop() {
            if x < self.n {
                id[x] = x;
                continue;
            }
            let [l, r] = self.children[x - self.n];
            if expanded {
                size[x] = size[l] + size[r];
                out.push(Merge { left: id[l], right: id[r], height: size[x] as f64 });
                id[x] = self.n + out.len() - 1;
            } else {
                stack.push((x, true));
                stack.push((r, false));
                stack.push((l, false));
            }
        }
    }
}

fn visit(arena: &mut Arena, f: &mut impl FnMut(&Arena)) {
    if arena.leaves == arena.target {
        f(arena);
        return;
    }
    let positions: Vec<usize> = arena.positions().collect();
    for x in positions {
        arena.insert(x);
        visit(arena, f);
        arena.remove_last();
    }
}

/// All `(2n-3)!!` shapes on `n` leaves, in enumeration order.
pub fn enumerate_tree_shapes(n: usize) -> Result<Vec<TreeShape>, OracleError> {
    check_range(n)?;
    let mut out = Vec::with_capacity(shape_count(n) as usize);
    visit(&mut Arena::two_leaves(n), &mut |a| out.push(a.shape()));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Maximize the reconstruction tree objective.
    TreeObjective,
    /// Minimize the Dasgupta cost.
    Dasgupta,
}

impl Objective {
    /// Whether `a` beats `b` by more than the tie tolerance.
    fn beats(self, a: f64, b: f64) -> bool {
        let tied = (a - b).abs() <= SCORE_RTOL * a.abs().max(b.abs());
        !tied
            && match self {
                Objective::TreeObjective => a > b,
                Objective::Dasgupta => a < b,
            }
    }

    pub fn score(self, g: &WeightedGraph, prior: &NodePrior, tree: &Dendrogram) -> Result<f64, MetricsError> {
        match self {
            Objective::TreeObjective => tree_objective(g, prior, tree),
            Objective::Dasgupta => dasgupta_cost(g, tree),
        }
    }
}

/// Best shape found by exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub shape: TreeShape,
    pub score: f64,
    pub n_shapes_searched: u128,
}

impl OracleResult {
    pub fn to_json(&self, labels: Option<&[String]>) -> Value {
        json!({
            "shape": self.shape.to_json(labels),
            "score": self.score,
            "n_shapes_searched": self.n_shapes_searched as u64,
        })
    }
}

/// Exact optimum over all shapes. Ties go to the earliest shape in
/// enumeration order, independently of how work is split across threads.
pub fn exhaustive_optimum(
    g: &WeightedGraph,
    prior: &NodePrior,
    objective: Objective,
) -> Result<OracleResult, OracleError> {
    let n = g.n();
    check_range(n)?;
    if prior.len() != n {
        return Err(MetricsError::SizeMismatch { graph: n, other: prior.len(), what: "prior" }.into());
    }
    // split on the shapes of the first few leaves; every prefix has the
    // same number of completions, so prefix order is enumeration order
    let mut seed = Arena::two_leaves(n);
    seed.target = n.min(5);
    let mut prefixes = Vec::new();
    visit(&mut seed, &mut |a| prefixes.push(a.clone()));
    for p in &mut prefixes {
        p.target = n;
    }
    let labels = g.labels().to_vec();
    let per_prefix: Vec<Result<Option<(f64, Arena)>, MetricsError>> = prefixes
        .into_par_iter()
        .map(|mut prefix| {
            let mut best: Option<(f64, Arena)> = None;
            let mut failure = None;
            let mut merges = Vec::with_capacity(n - 1);
            visit(&mut prefix, &mut |a| {
                if failure.is_some() {
                    return;
                }
                a.merges(&mut merges);
                let score = Dendrogram::new(labels.clone(), merges.clone())
                    .map_err(MetricsError::from)
                    .and_then(|d| objective.score(g, prior, &d));
                match score {
                    Ok(s) => {
                        if best.as_ref().is_none_or(|(b, _)| objective.beats(s, *b)) {
                            best = Some((s, a.clone()));
                        }
                    }
                    Err(e) => failure = Some(e),
                }
            });
            failure.map_or(Ok(best), Err)
        })
        .collect();
    let mut best: Option<(f64, Arena)> = None;
    for candidate in per_prefix {
        if let Some((s, a)) = candidate? {
            if best.as_ref().is_none_or(|(b, _)| objective.beats(s, *b)) {
                best = Some((s, a));
            }
        }
    }
    let (score, arena) = best.expect("at least one shape");
    Ok(OracleResult { shape: arena.shape(), score, n_shapes_searched: shape_count(n) })
}

/// Exhaustive optimum next to the greedy (naive agglomeration) tree.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyGap {
    pub optimum: OracleResult,
    pub greedy_shape: TreeShape,
    pub greedy_score: f64,
    /// How much worse greedy is; never negative up to rounding.
    pub gap: f64,
}

pub fn greedy_gap(g: &WeightedGraph, prior: &NodePrior, objective: Objective) -> Result<GreedyGap, OracleError> {
    let optimum = exhaustive_optimum(g, prior, objective)?;
    let greedy = agglomerate_naive(g, prior);
    let greedy_score = objective.score(g, prior, &greedy)?;
    let gap = match objective {
        Objective::TreeObjective => optimum.score - greedy_score,
        Objective::Dasgupta => greedy_score - optimum.score,
    };
    Ok(GreedyGap { greedy_shape: TreeShape::from_dendrogram(&greedy), optimum, greedy_score, gap })
}
