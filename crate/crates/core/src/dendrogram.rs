//! Dendrograms as merge lists, the ultrametric they induce, flat cuts and
//! (de)serialization.
//!
//! A dendrogram over `n` leaves is stored as `n - 1` merge records. Leaves
//! carry ids `0..n`; the `k`-th merge creates internal node `n + k`, so a
//! merge may only reference nodes created before it. Heights are kept as
//! given: a merge list whose heights decrease towards the root is a valid
//! [`Dendrogram`] but not a *regular* one, see [`Dendrogram::is_regular`].

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::NodeId;

/// Relative slack accepted when comparing a parent height with its children.
pub const REGULARITY_RTOL: f64 = 1e-10;

const NO_PARENT: usize = usize::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DendrogramError {
    #[error("expected {expected} merges for {n} leaves, found {found}")]
    MergeCount { n: usize, expected: usize, found: usize },
    #[error("merge {merge}: child {child} does not exist yet")]
    UnknownChild { merge: usize, child: usize },
    #[error("merge {merge}: node {child} already has a parent")]
    ReusedChild { merge: usize, child: usize },
    #[error("merge {merge}: height {height} must be positive and finite")]
    NonPositiveHeight { merge: usize, height: f64 },
    #[error("irregular dendrogram: merge {merge} at height {height} sits below its child at {child_height}")]
    IrregularDendrogram { merge: usize, height: f64, child_height: f64 },
    #[error("leaf {0} out of range")]
    LeafOutOfRange(NodeId),
    #[error("distance of a leaf to itself is undefined (leaf {0})")]
    SameLeaf(NodeId),
    #[error("cluster count {k} outside 1..={n}")]
    ClusterCount { k: usize, n: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("labels do not match: {0}")]
    LabelMismatch(String),
    #[error("malformed JSON dendrogram: {0}")]
    Json(String),
    #[error("malformed Newick at byte {pos}: {msg}")]
    Newick { pos: usize, msg: String },
}

/// One agglomeration step: `left` and `right` join at `height`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(usize, usize, f64)", into = "(usize, usize, f64)")]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

impl From<(usize, usize, f64)> for Merge {
    fn from((left, right, height): (usize, usize, f64)) -> Self {
        Merge { left, right, height }
    }
}

impl From<Merge> for (usize, usize, f64) {
    fn from(m: Merge) -> Self {
        (m.left, m.right, m.height)
    }
}

#[derive(Serialize, Deserialize)]
struct DendrogramJson {
    n_leaves: usize,
    labels: Vec<String>,
    merges: Vec<Merge>,
}

/// Rooted binary tree over labelled leaves with a height per internal node.
#[derive(Debug, Clone)]
pub struct Dendrogram {
    labels: Vec<String>,
    merges: Vec<Merge>,
    parent: Vec<usize>,
    depth: Vec<usize>,
    size: Vec<usize>,
    min_leaf: Vec<NodeId>,
}

impl PartialEq for Dendrogram {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.merges == other.merges
    }
}

impl Dendrogram {
    /// Validates the tree structure and heights. Regularity is not required.
    pub fn new(labels: Vec<String>, merges: Vec<Merge>) -> Result<Self, DendrogramError> {
        let n = labels.len();
        let expected = n.saturating_sub(1);
        if n == 0 || merges.len() != expected {
            return Err(DendrogramError::MergeCount { n, expected, found: merges.len() });
        }
        let total = 2 * n - 1;
        let mut parent = vec![NO_PARENT; total];
        let mut size = vec![1; total];
        let mut min_leaf: Vec<NodeId> = (0..total).collect();
        for (k, m) in merges.iter().enumerate() {
            let id = n + k;
            for child in [m.left, m.right] {
                if child >= id {
                    return Err(DendrogramError::UnknownChild { merge: k, child });
                }
                if parent[child] != NO_PARENT {
                    return Err(DendrogramError::ReusedChild { merge: k, child });
                }
                parent[child] = id;
            }
            if m.left == m.right {
                return Err(DendrogramError::ReusedChild { merge: k, child: m.left });
            }
            if !(m.height > 0.0) || !m.height.is_finite() {
                return Err(DendrogramError::NonPositiveHeight { merge: k, height: m.height });
            }
            size[id] = size[m.left] + size[m.right];
            min_leaf[id] = min_leaf[m.left].min(min_leaf[m.right]);
        }
        let mut depth = vec![0; total];
        for id in (0..total - 1).rev() {
            depth[id] = depth[parent[id]] + 1;
        }
        Ok(Dendrogram { labels, merges, parent, depth, size, min_leaf })
    }

    /// Like [`Dendrogram::new`], additionally rejecting irregular heights.
    pub fn new_regular(labels: Vec<String>, merges: Vec<Merge>) -> Result<Self, DendrogramError> {
        let d = Self::new(labels, merges)?;
        d.check_regular()?;
        Ok(d)
    }

    /// Builds a dendrogram from merges expressed by any leaf of each side,
    /// in the order they happened. The side holding the smaller leaf id
    /// becomes `left`.
    pub fn from_leaf_pairs(
        labels: Vec<String>,
        pairs: &[(NodeId, NodeId, f64)],
    ) -> Result<Self, DendrogramError> {
        let n = labels.len();
        let mut uf = UnionFind::new(n);
        let mut node_of_root: Vec<usize> = (0..n).collect();
        let mut merges = Vec::with_capacity(pairs.len());
        for (k, &(a, b, height)) in pairs.iter().enumerate() {
            if a >= n {
                return Err(DendrogramError::LeafOutOfRange(a));
            }
            if b >= n {
                return Err(DendrogramError::LeafOutOfRange(b));
            }
            let (ra, rb) = (uf.find(a), uf.find(b));
            if ra == rb {
                return Err(DendrogramError::ReusedChild { merge: k, child: node_of_root[ra] });
            }
            let (na, nb) = (node_of_root[ra], node_of_root[rb]);
            // union-find roots are the minimum leaf of each side
            let (left, right) = if ra < rb { (na, nb) } else { (nb, na) };
            merges.push(Merge { left, right, height });
            let root = uf.union(ra, rb);
            node_of_root[root] = n + k;
        }
        Self::new(labels, merges)
    }

    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn root(&self) -> usize {
        2 * self.n_leaves() - 2
    }

    /// Height of a tree node; leaves sit at zero.
    pub fn height(&self, node: usize) -> f64 {
        let n = self.n_leaves();
        if node < n {
            0.0
        } else {
            self.merges[node - n].height
        }
    }

    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        self.merges.iter().map(|m| m.height)
    }

    /// Number of leaves below a tree node.
    pub fn size(&self, node: usize) -> usize {
        self.size[node]
    }

    pub fn min_leaf(&self, node: usize) -> NodeId {
        self.min_leaf[node]
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        match self.parent[node] {
            NO_PARENT => None,
            p => Some(p),
        }
    }

    /// Leaves below a tree node, ascending.
    pub fn leaves(&self, node: usize) -> Vec<NodeId> {
        let n = self.n_leaves();
        let mut out = Vec::with_capacity(self.size[node]);
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            if x < n {
                out.push(x);
            } else {
                let m = &self.merges[x - n];
                stack.push(m.left);
                stack.push(m.right);
            }
        }
        out.sort_unstable();
        out
    }

    /// Same tree with new heights, one per merge.
    pub fn with_heights(&self, heights: &[f64]) -> Result<Self, DendrogramError> {
        let merges = self
            .merges
            .iter()
            .zip(heights)
            .map(|(m, &height)| Merge { height, ..*m })
            .collect();
        Self::new(self.labels.clone(), merges)
    }

    /// Every height multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Result<Self, DendrogramError> {
        let heights: Vec<f64> = self.heights().map(|h| h * alpha).collect();
        self.with_heights(&heights)
    }

    /// Lowest common ancestor of two tree nodes.
    pub fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a];
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b];
        }
        while a != b {
            a = self.parent[a];
            b = self.parent[b];
        }
        a
    }

    pub fn is_regular(&self) -> bool {
        self.check_regular().is_ok()
    }

    /// Checks that no internal node sits below one of its children.
    pub fn check_regular(&self) -> Result<(), DendrogramError> {
        let n = self.n_leaves();
        for (k, m) in self.merges.iter().enumerate() {
            for child in [m.left, m.right] {
                let child_height = self.height(child);
                if m.height + REGULARITY_RTOL * child_height < child_height {
                    return Err(DendrogramError::IrregularDendrogram {
                        merge: k,
                        height: m.height,
                        child_height,
                    });
                }
            }
            debug_assert!(m.left < n + k);
        }
        Ok(())
    }

    /// `d(u, v)`: height of the lowest common ancestor of two distinct leaves.
    pub fn ultrametric_distance(&self, u: NodeId, v: NodeId) -> Result<f64, DendrogramError> {
        let n = self.n_leaves();
        if u >= n {
            return Err(DendrogramError::LeafOutOfRange(u));
        }
        if v >= n {
            return Err(DendrogramError::LeafOutOfRange(v));
        }
        if u == v {
            return Err(DendrogramError::SameLeaf(u));
        }
        Ok(self.height(self.lca(u, v)))
    }

    /// Row-major `n × n` matrix of leaf distances, zero on the diagonal.
    /// One pass over the merges, `O(n²)` overall.
    pub fn ultrametric_matrix(&self) -> Vec<f64> {
        let n = self.n_leaves();
        let mut dist = vec![0.0; n * n];
        let mut leaves: Vec<Vec<NodeId>> = (0..n).map(|u| vec![u]).collect();
        leaves.resize(2 * n - 1, Vec::new());
        for (k, m) in self.merges.iter().enumerate() {
            let left = std::mem::take(&mut leaves[m.left]);
            let right = std::mem::take(&mut leaves[m.right]);
            for &a in &left {
                for &b in &right {
                    dist[a * n + b] = m.height;
                    dist[b * n + a] = m.height;
                }
            }
            let (mut big, small) = if left.len() >= right.len() { (left, right) } else { (right, left) };
            big.extend(small);
            leaves[n + k] = big;
        }
        dist
    }

    /// Checks `d(u,v) ≤ max(d(u,x), d(v,x))` on every triple for up to 60
    /// leaves, and on 10⁵ seeded random triples beyond that.
    pub fn check_ultrametric(&self) -> bool {
        let n = self.n_leaves();
        if n < 3 {
            return true;
        }
        let dist = self.ultrametric_matrix();
        let holds = |u: usize, v: usize, x: usize| {
            let bound = dist[u * n + x].max(dist[v * n + x]);
            dist[u * n + v] <= bound + REGULARITY_RTOL * bound
        };
        if n <= 60 {
            for u in 0..n {
                for v in 0..n {
                    for x in 0..n {
                        if u != v && u != x && v != x && !holds(u, v, x) {
                            return false;
                        }
                    }
                }
            }
            true
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            (0..100_000).all(|_| {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                let x = rng.gen_range(0..n);
                u == v || u == x || v == x || holds(u, v, x)
            })
        }
    }

    /// Removes the `k - 1` highest merges and returns the `k` remaining
    /// subtrees. Among equal heights the later merge is removed first.
    pub fn cut_k(&self, k: usize) -> Result<Partition, DendrogramError> {
        let n = self.n_leaves();
        if k == 0 || k > n {
            return Err(DendrogramError::ClusterCount { k, n });
        }
        let mut order: Vec<usize> = (0..self.merges.len()).collect();
        order.sort_by(|&a, &b| {
            self.merges[b].height.total_cmp(&self.merges[a].height).then(b.cmp(&a))
        });
        let mut removed = vec![false; self.merges.len()];
        for &i in &order[..k - 1] {
            removed[i] = true;
        }
        Ok(self.blocks_from(|i| !removed[i]))
    }

    /// Maximal subtrees whose internal heights are all at most `h`.
    pub fn cut_height(&self, h: f64) -> Partition {
        let n = self.n_leaves();
        let mut within = vec![true; 2 * n - 1];
        for (k, m) in self.merges.iter().enumerate() {
            within[n + k] = m.height <= h && within[m.left] && within[m.right];
        }
        self.blocks_from(|i| within[n + i])
    }

    fn blocks_from(&self, keep: impl Fn(usize) -> bool) -> Partition {
        let n = self.n_leaves();
        let mut uf = UnionFind::new(n);
        for (i, m) in self.merges.iter().enumerate() {
            if keep(i) {
                uf.union(self.min_leaf[m.left], self.min_leaf[m.right]);
            }
        }
        let mut blocks: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for u in 0..n {
            blocks[uf.find(u)].push(u);
        }
        blocks.retain(|b| !b.is_empty());
        Partition { blocks }.normalized()
    }

    /// Re-indexes leaves so that leaf `i` carries `labels[i]`.
    pub fn relabel_to(&self, labels: &[String]) -> Result<Self, DendrogramError> {
        let n = self.n_leaves();
        if labels.len() != n {
            return Err(DendrogramError::LabelMismatch(format!(
                "dendrogram has {n} leaves, graph has {} nodes",
                labels.len()
            )));
        }
        let index: std::collections::HashMap<&str, usize> =
            labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut perm = Vec::with_capacity(n);
        for label in &self.labels {
            match index.get(label.as_str()) {
                Some(&i) => perm.push(i),
                None => {
                    return Err(DendrogramError::LabelMismatch(format!("leaf {label:?} is not a graph node")))
                }
            }
        }
        let mut seen = vec![false; n];
        for &i in &perm {
            if std::mem::replace(&mut seen[i], true) {
                return Err(DendrogramError::LabelMismatch(format!("label {:?} repeated", labels[i])));
            }
        }
        let pairs: Vec<_> = self
            .merges
            .iter()
            .map(|m| (perm[self.min_leaf[m.left]], perm[self.min_leaf[m.right]], m.height))
            .collect();
        Self::from_leaf_pairs(labels.to_vec(), &pairs)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(DendrogramJson {
            n_leaves: self.n_leaves(),
            labels: self.labels.clone(),
            merges: self.merges.clone(),
        })
        .expect("dendrogram serializes")
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    /// Parses the JSON form and requires a regular dendrogram.
    pub fn from_json(text: &str) -> Result<Self, DendrogramError> {
        let raw: DendrogramJson =
            serde_json::from_str(text).map_err(|e| DendrogramError::Json(e.to_string()))?;
        if raw.labels.len() != raw.n_leaves {
            return Err(DendrogramError::Json(format!(
                "n_leaves is {} but {} labels given",
                raw.n_leaves,
                raw.labels.len()
            )));
        }
        Self::new_regular(raw.labels, raw.merges)
    }

    /// Newick with branch length `height(parent) - height(node)`; leaves sit
    /// at zero so leaf-to-ancestor path lengths reproduce the heights.
    pub fn to_newick(&self) -> String {
        let n = self.n_leaves();
        let mut out = String::new();
        // (node, parent height, stage)
        let mut stack = vec![(self.root(), None::<f64>, 0u8)];
        while let Some((node, parent_height, stage)) = stack.pop() {
            if node < n {
                out.push_str(&quote_label(&self.labels[node]));
                push_length(&mut out, parent_height, 0.0);
                continue;
            }
            let m = self.merges[node - n];
            match stage {
                0 => {
                    out.push('(');
                    stack.push((node, parent_height, 1));
                    stack.push((m.left, Some(m.height), 0));
                }
                1 => {
                    out.push(',');
                    stack.push((node, parent_height, 2));
                    stack.push((m.right, Some(m.height), 0));
                }
                _ => {
                    out.push(')');
                    push_length(&mut out, parent_height, m.height);
                }
            }
        }
        out.push(';');
        out
    }

    /// Parses a binary Newick tree whose branch lengths describe an
    /// ultrametric. Leaves are numbered in order of appearance; merges are
    /// ordered by height.
    pub fn from_newick(text: &str) -> Result<Self, DendrogramError> {
        NewickParser::new(text).parse()
    }
}

fn push_length(out: &mut String, parent_height: Option<f64>, height: f64) {
    if let Some(p) = parent_height {
        let _ = write!(out, ":{}", p - height);
    }
}

fn quote_label(label: &str) -> String {
    let special = |c: char| c.is_whitespace() || "()[]':;,".contains(c);
    if label.is_empty() || label.chars().any(special) {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

enum NewickNode {
    Leaf(String),
    Internal(usize, usize),
}

struct NewickParser<'a> {
    text: &'a [u8],
    pos: usize,
    nodes: Vec<NewickNode>,
    lengths: Vec<Option<f64>>,
}

impl<'a> NewickParser<'a> {
    fn new(text: &'a str) -> Self {
        NewickParser { text: text.as_bytes(), pos: 0, nodes: Vec::new(), lengths: Vec::new() }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, DendrogramError> {
        Err(DendrogramError::Newick { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), DendrogramError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {:?}", c as char))
        }
    }

    fn parse(mut self) -> Result<Dendrogram, DendrogramError> {
        let root = self.subtree(0)?;
        self.expect(b';')?;
        if self.peek().is_some() {
            return self.err("trailing characters after ';'");
        }
        self.build(root)
    }

    fn subtree(&mut self, depth: usize) -> Result<usize, DendrogramError> {
        if depth > 100_000 {
            return self.err("tree too deep");
        }
        let node = if self.peek() == Some(b'(') {
            self.pos += 1;
            let left = self.subtree(depth + 1)?;
            self.expect(b',')?;
            let right = self.subtree(depth + 1)?;
            if self.peek() == Some(b',') {
                return self.err("non-binary node");
            }
            self.expect(b')')?;
            // internal labels are ignored
            self.label()?;
            self.nodes.push(NewickNode::Internal(left, right));
            self.nodes.len() - 1
        } else {
            let label = self.label()?;
            if label.is_empty() {
                return self.err("leaf without label");
            }
            self.nodes.push(NewickNode::Leaf(label));
            self.nodes.len() - 1
        };
        let length = if self.peek() == Some(b':') {
            self.pos += 1;
            Some(self.number()?)
        } else {
            None
        };
        self.lengths.push(length);
        Ok(node)
    }

    fn label(&mut self) -> Result<String, DendrogramError> {
        if self.peek() == Some(b'\'') {
            self.pos += 1;
            let mut bytes = Vec::new();
            loop {
                match self.text.get(self.pos) {
                    None => return self.err("unterminated quoted label"),
                    Some(b'\'') if self.text.get(self.pos + 1) == Some(&b'\'') => {
                        bytes.push(b'\'');
                        self.pos += 2;
                    }
                    Some(b'\'') => {
                        self.pos += 1;
                        break;
                    }
                    Some(&c) => {
                        bytes.push(c);
                        self.pos += 1;
                    }
                }
            }
            return String::from_utf8(bytes).or_else(|_| self.err("label is not UTF-8"));
        }
        let start = self.pos;
        while let Some(&c) = self.text.get(self.pos) {
            if c.is_ascii_whitespace() || b"()[]':;,".contains(&c) {
                break;
            }
            self.pos += 1;
        }
        String::from_utf8(self.text[start..self.pos].to_vec()).or_else(|_| self.err("label is not UTF-8"))
    }

    fn number(&mut self) -> Result<f64, DendrogramError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(&c) = self.text.get(self.pos) {
            if c.is_ascii_digit() || b"+-.eE".contains(&c) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let token = std::str::from_utf8(&self.text[start..self.pos]).unwrap_or("");
        match token.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => self.err(format!("bad branch length {token:?}")),
        }
    }

    fn build(self, root: usize) -> Result<Dendrogram, DendrogramError> {
        // `lengths` is pushed in completion order, which is also node order
        let lengths = self.lengths;
        let err = |msg: String| Err(DendrogramError::Newick { pos: 0, msg });
        let mut labels = Vec::new();
        let mut leaf_id = vec![usize::MAX; self.nodes.len()];
        let mut height = vec![0.0; self.nodes.len()];
        let mut internal = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                NewickNode::Leaf(label) => {
                    leaf_id[i] = labels.len();
                    labels.push(label.clone());
                }
                NewickNode::Internal(l, r) => {
                    let (Some(bl), Some(br)) = (lengths[*l], lengths[*r]) else {
                        return err("missing branch length".into());
                    };
                    if bl < 0.0 || br < 0.0 {
                        return Err(DendrogramError::IrregularDendrogram {
                            merge: internal.len(),
                            height: height[*l] + bl,
                            child_height: height[*l].max(height[*r]),
                        });
                    }
                    let (hl, hr) = (height[*l] + bl, height[*r] + br);
                    if (hl - hr).abs() > 1e-9 * hl.abs().max(hr.abs()) {
                        return err(format!("branch lengths are not ultrametric ({hl} vs {hr})"));
                    }
                    height[i] = hl.max(hr);
                    internal.push(i);
                }
            }
        }
        if labels.is_empty() || root != self.nodes.len() - 1 {
            return err("empty tree".into());
        }
        // any leaf below a node stands in for it
        let mut rep = vec![0; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            rep[i] = match node {
                NewickNode::Leaf(_) => leaf_id[i],
                NewickNode::Internal(l, _) => rep[*l],
            };
        }
        internal.sort_by(|&a, &b| height[a].total_cmp(&height[b]).then(a.cmp(&b)));
        let pairs: Vec<_> = internal
            .iter()
            .map(|&i| match self.nodes[i] {
                NewickNode::Internal(l, r) => (rep[l], rep[r], height[i]),
                NewickNode::Leaf(_) => unreachable!(),
            })
            .collect();
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return err(format!("duplicate leaf label {dup:?}"));
        }
        let d = Dendrogram::from_leaf_pairs(labels, &pairs)?;
        d.check_regular()?;
        Ok(d)
    }
}

/// Flat clustering of the leaves. Block order is preserved as given.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Partition {
    blocks: Vec<Vec<NodeId>>,
}

impl Partition {
    /// Validates that the blocks are non-empty, disjoint and cover `0..n`.
    pub fn new(blocks: Vec<Vec<NodeId>>, n: usize) -> Result<Self, DendrogramError> {
        let mut seen = vec![false; n];
        for block in &blocks {
            if block.is_empty() {
                return Err(DendrogramError::InvalidPartition("empty block".into()));
            }
            for &u in block {
                if u >= n {
                    return Err(DendrogramError::LeafOutOfRange(u));
                }
                if std::mem::replace(&mut seen[u], true) {
                    return Err(DendrogramError::InvalidPartition(format!("node {u} in two blocks")));
                }
            }
        }
        if let Some(u) = seen.iter().position(|&s| !s) {
            return Err(DendrogramError::InvalidPartition(format!("node {u} not covered")));
        }
        Ok(Partition { blocks })
    }

    pub fn singletons(n: usize) -> Self {
        Partition { blocks: (0..n).map(|u| vec![u]).collect() }
    }

    pub fn whole(n: usize) -> Self {
        Partition { blocks: vec![(0..n).collect()] }
    }

    pub fn blocks(&self) -> &[Vec<NodeId>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Blocks sorted internally and ordered by smallest member.
    pub fn normalized(mut self) -> Self {
        for block in &mut self.blocks {
            block.sort_unstable();
        }
        self.blocks.sort_unstable_by_key(|b| b[0]);
        self
    }

    /// Whether every block of `coarser` is a union of blocks of `self`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let n: usize = self.blocks.iter().map(Vec::len).sum();
        let mut owner = vec![usize::MAX; n];
        for (i, block) in coarser.blocks.iter().enumerate() {
            for &u in block {
                if u >= n {
                    return false;
                }
                owner[u] = i;
            }
        }
        self.blocks.iter().all(|block| block.iter().all(|&u| owner[u] == owner[block[0]]))
    }
}

/// Union-find whose roots are always the smallest element of their set.
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        lo
    }
}
