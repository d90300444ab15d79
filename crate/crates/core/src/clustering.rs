//! Greedy agglomerative clustering under the reconstruction linkage
//! `σ(A,B) = p(A,B) / (2 π(A) π(B))`, where `p(A,B)` is the symmetric
//! cross mass. A merge of `A` and `B` happens at height `1 / σ(A,B)`.
//!
//! After a merge, similarities to the new cluster are derived from the old
//! ones as the `π`-weighted average
//!
//! ```text
//! σ(A∪B, C) = π(A)/π(A∪B) · σ(A,C) + π(B)/π(A∪B) · σ(B,C)
//! ```
//!
//! so the linkage never exceeds the larger of its parents. This makes the
//! merge heights non-decreasing and lets the nearest-neighbor chain produce
//! the same tree as the naive global search.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::dendrogram::Dendrogram;
use crate::graph::{NodeId, NodePrior, WeightedGraph};

/// Relative tolerance under which two similarities count as tied.
pub const TIE_RTOL: f64 = 1e-12;

/// Cluster identifier: leaves are `0..n`, the `k`-th merge creates `n + k`.
pub type ClusterId = usize;

const INACTIVE: usize = usize::MAX;

/// Tie key of a pair of clusters: their smallest leaves, ascending. It does
/// not depend on merge order, so both algorithms rank pairs identically.
pub(crate) fn pair_key(min_leaf_a: NodeId, min_leaf_b: NodeId) -> (NodeId, NodeId) {
    (min_leaf_a.min(min_leaf_b), min_leaf_a.max(min_leaf_b))
}

/// Whether `(s, key)` ranks strictly above `(best, best_key)`: larger
/// similarity first, ties (within [`TIE_RTOL`]) to the smaller key.
pub(crate) fn ranks_above(s: f64, key: (NodeId, NodeId), best: f64, best_key: (NodeId, NodeId)) -> bool {
    if (s - best).abs() <= TIE_RTOL * s.abs().max(best.abs()) {
        key < best_key
    } else {
        s > best
    }
}

/// `σ = p_ab / (2 π_a π_b)`.
pub fn linkage_similarity(p_ab: f64, pi_a: f64, pi_b: f64) -> f64 {
    p_ab / (2.0 * pi_a * pi_b)
}

/// Similarity of `A ∪ B` to a third cluster from the similarities of `A`
/// and `B` to it.
pub fn merge_update(sigma_ac: f64, sigma_bc: f64, pi_a: f64, pi_b: f64) -> f64 {
    let pi_ab = pi_a + pi_b;
    (pi_a / pi_ab) * sigma_ac + (pi_b / pi_ab) * sigma_bc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Naive,
    NnChain,
}

/// Runs the chosen agglomeration.
pub fn agglomerate(g: &WeightedGraph, prior: &NodePrior, algorithm: Algorithm) -> Dendrogram {
    match algorithm {
        Algorithm::Naive => agglomerate_naive(g, prior),
        Algorithm::NnChain => agglomerate_nn_chain(g, prior),
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new(x: f64) -> Self {
        CompensatedSum { sum: x, compensation: 0.0 }
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Adds another compensated sum, keeping both error terms.
    pub fn absorb(&mut self, other: CompensatedSum) {
        self.add(other.sum);
        self.compensation += other.compensation;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Hooks into a running agglomeration, for tracing and checking.
pub trait MergeObserver {
    /// Called with the state just before clusters `a` and `b` merge.
    fn before_merge(&mut self, _state: &ClusterState, _a: ClusterId, _b: ClusterId) {}
    /// Called once `merged` has replaced its two parts.
    fn after_merge(&mut self, _state: &ClusterState, _merged: ClusterId) {}
}

struct Silent;

impl MergeObserver for Silent {}

/// Active clusters with cached prior masses and pairwise linkages.
///
/// Storage is a dense `n × n` similarity table indexed by slot; a merged
/// cluster reuses the slot of one of its parts.
pub struct ClusterState {
    n: usize,
    slot_of: Vec<usize>,
    id_of: Vec<ClusterId>,
    active: Vec<bool>,
    active_count: usize,
    members: Vec<Vec<NodeId>>,
    mass: Vec<CompensatedSum>,
    sigma: Vec<f64>,
    min_leaf: Vec<NodeId>,
    next_id: ClusterId,
    log: Vec<(NodeId, NodeId, f64)>,
    // log index of the merge that created each slot's cluster
    created_by: Vec<usize>,
    // log indices of the merges that created the two parts
    parts: Vec<[usize; 2]>,
}

impl ClusterState {
    /// One cluster per node.
    pub fn new(g: &WeightedGraph, prior: &NodePrior) -> Self {
        let n = g.n();
        let mut sigma = vec![0.0; n * n];
        let w = g.total_weight();
        for &(u, v, weight) in g.edges() {
            let s = linkage_similarity(2.0 * weight / w, prior.get(u), prior.get(v));
            sigma[u * n + v] = s;
            sigma[v * n + u] = s;
        }
        let mut slot_of = vec![INACTIVE; 2 * n - 1];
        slot_of[..n].iter_mut().enumerate().for_each(|(i, s)| *s = i);
        ClusterState {
            n,
            slot_of,
            id_of: (0..n).collect(),
            active: vec![true; n],
            active_count: n,
            members: (0..n).map(|u| vec![u]).collect(),
            mass: (0..n).map(|u| CompensatedSum::new(prior.get(u))).collect(),
            sigma,
            min_leaf: (0..n).collect(),
            next_id: n,
            log: Vec::with_capacity(n.saturating_sub(1)),
            created_by: vec![INACTIVE; n],
            parts: Vec::with_capacity(n.saturating_sub(1)),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn active_count(&self) -> usize {
        self.active_count
    }

    /// Active cluster ids, ascending.
    pub fn active_clusters(&self) -> Vec<ClusterId> {
        let mut ids: Vec<_> = (0..self.n).filter(|&s| self.active[s]).map(|s| self.id_of[s]).collect();
        ids.sort_unstable();
        ids
    }

    fn slot(&self, id: ClusterId) -> usize {
        let s = self.slot_of[id];
        assert!(s != INACTIVE, "cluster {id} is not active");
        s
    }

    pub fn is_active(&self, id: ClusterId) -> bool {
        self.slot_of.get(id).is_some_and(|&s| s != INACTIVE)
    }

    /// Member nodes of an active cluster, unordered.
    pub fn members(&self, id: ClusterId) -> &[NodeId] {
        &self.members[self.slot(id)]
    }

    /// Cached `π(A)`.
    pub fn prior_mass(&self, id: ClusterId) -> f64 {
        self.mass[self.slot(id)].value()
    }

    /// Cached `σ(A, B)`.
    pub fn similarity(&self, a: ClusterId, b: ClusterId) -> f64 {
        self.sigma[self.slot(a) * self.n + self.slot(b)]
    }

    fn merge_slots<O: MergeObserver>(&mut self, a: usize, b: usize, observer: &mut O) {
        let n = self.n;
        let (ida, idb) = (self.id_of[a], self.id_of[b]);
        observer.before_merge(self, ida, idb);
        let height = 1.0 / self.sigma[a * n + b];
        let (pi_a, pi_b) = (self.mass[a].value(), self.mass[b].value());
        let (keep, gone) = if a < b { (a, b) } else { (b, a) };
        for c in 0..n {
            if !self.active[c] || c == a || c == b {
                continue;
            }
            let (s_ac, s_bc) = (self.sigma[a * n + c], self.sigma[b * n + c]);
            let s = if s_ac == 0.0 && s_bc == 0.0 { 0.0 } else { merge_update(s_ac, s_bc, pi_a, pi_b) };
            self.sigma[keep * n + c] = s;
            self.sigma[c * n + keep] = s;
        }
        self.sigma[gone * n + keep] = 0.0;
        self.sigma[keep * n + gone] = 0.0;
        let gone_mass = self.mass[gone];
        self.mass[keep].absorb(gone_mass);
        let mut moved = std::mem::take(&mut self.members[gone]);
        if moved.len() > self.members[keep].len() {
            std::mem::swap(&mut moved, &mut self.members[keep]);
        }
        self.members[keep].extend(moved);
        let (leaf_a, leaf_b) = (self.min_leaf[a], self.min_leaf[b]);
        self.min_leaf[keep] = leaf_a.min(leaf_b);
        self.log.push((leaf_a, leaf_b, height));
        self.parts.push([self.created_by[a], self.created_by[b]]);
        self.created_by[keep] = self.log.len() - 1;
        self.created_by[gone] = INACTIVE;
        self.active[gone] = false;
        self.active_count -= 1;
        self.slot_of[ida] = INACTIVE;
        self.slot_of[idb] = INACTIVE;
        let id = self.next_id;
        self.next_id += 1;
        self.slot_of[id] = keep;
        self.id_of[keep] = id;
        observer.after_merge(self, id);
    }

    fn first_active(&self) -> usize {
        self.active.iter().position(|&a| a).expect("at least one active cluster")
    }
}

/// Reference agglomeration: at every step, scan all active pairs and merge
/// the one with the largest linkage. Ties (within [`TIE_RTOL`]) go to the
/// pair whose smallest leaves, ascending, are lexicographically smallest.
/// `O(n³)`.
pub fn agglomerate_naive(g: &WeightedGraph, prior: &NodePrior) -> Dendrogram {
    agglomerate_naive_observed(g, prior, &mut Silent)
}

pub fn agglomerate_naive_observed<O: MergeObserver>(
    g: &WeightedGraph,
    prior: &NodePrior,
    observer: &mut O,
) -> Dendrogram {
    let mut state = ClusterState::new(g, prior);
    let n = state.n;
    while state.active_count > 1 {
        let mut best: Option<(f64, (NodeId, NodeId), usize, usize)> = None;
        for a in (0..n).filter(|&a| state.active[a]) {
            for b in (a + 1..n).filter(|&b| state.active[b]) {
                let s = state.sigma[a * n + b];
                let key = pair_key(state.min_leaf[a], state.min_leaf[b]);
                if best.is_none_or(|(bs, bkey, _, _)| ranks_above(s, key, bs, bkey)) {
                    best = Some((s, key, a, b));
                }
            }
        }
        let (_, _, a, b) = best.expect("two active clusters");
        let (a, b) = if state.id_of[a] < state.id_of[b] { (a, b) } else { (b, a) };
        state.merge_slots(a, b, observer);
    }
    Dendrogram::from_leaf_pairs(g.labels().to_vec(), &state.log).expect("greedy merges form a tree")
}

/// Nearest-neighbor chain agglomeration, `O(n²)` time on the dense table.
///
/// The chain grows by following nearest neighbors until two clusters are
/// mutual nearest neighbors, which are then merged. Merges are recorded in
/// chain order and sorted by height afterwards.
pub fn agglomerate_nn_chain(g: &WeightedGraph, prior: &NodePrior) -> Dendrogram {
    agglomerate_nn_chain_observed(g, prior, &mut Silent)
}

pub fn agglomerate_nn_chain_observed<O: MergeObserver>(
    g: &WeightedGraph,
    prior: &NodePrior,
    observer: &mut O,
) -> Dendrogram {
    let mut state = ClusterState::new(g, prior);
    let n = state.n;
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    while state.active_count > 1 {
        if chain.is_empty() {
            chain.push(state.first_active());
        }
        let a = chain[chain.len() - 1];
        let row = &state.sigma[a * n..(a + 1) * n];
        let mut best: Option<(f64, (NodeId, NodeId), usize)> = None;
        for c in (0..n).filter(|&c| c != a && state.active[c]) {
            let key = pair_key(state.min_leaf[a], state.min_leaf[c]);
            if best.is_none_or(|(bs, bkey, _)| ranks_above(row[c], key, bs, bkey)) {
                best = Some((row[c], key, c));
            }
        }
        let (_, _, best) = best.expect("two active clusters");
        if chain.len() >= 2 && chain[chain.len() - 2] == best {
            chain.truncate(chain.len() - 2);
            let (x, y) = if state.id_of[best] < state.id_of[a] { (best, a) } else { (a, best) };
            state.merge_slots(x, y, observer);
        } else {
            chain.push(best);
        }
    }
    let pairs = greedy_order(&state.log, &state.parts);
    Dendrogram::from_leaf_pairs(g.labels().to_vec(), &pairs).expect("chain merges form a tree")
}

/// Replays chain merges in the order the naive search would perform them:
/// among merges whose parts already exist, lowest height first, then the
/// smaller tie key.
fn greedy_order(log: &[(NodeId, NodeId, f64)], parts: &[[usize; 2]]) -> Vec<(NodeId, NodeId, f64)> {
    let mut parent = vec![INACTIVE; log.len()];
    let mut pending = vec![0u8; log.len()];
    for (i, ps) in parts.iter().enumerate() {
        for &p in ps.iter().filter(|&&p| p != INACTIVE) {
            parent[p] = i;
            pending[i] += 1;
        }
    }
    // heights are positive, so their bit patterns order like the values
    let entry = |i: usize| {
        let (a, b, h) = log[i];
        Reverse((h.to_bits(), pair_key(a, b), i))
    };
    let mut ready: BinaryHeap<_> = (0..log.len()).filter(|&i| pending[i] == 0).map(entry).collect();
    let mut out = Vec::with_capacity(log.len());
    while let Some(Reverse((_, _, i))) = ready.pop() {
        out.push(log[i]);
        let p = parent[i];
        if p != INACTIVE {
            pending[p] -= 1;
            if pending[p] == 0 {
                ready.push(entry(p));
            }
        }
    }
    out
}
