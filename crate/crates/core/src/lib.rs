//! Hierarchical clustering of weighted graphs by dendrograms that best
//! reconstruct the graph.
//!
//! A dendrogram with heights `d` and a node prior `π` decode into a
//! complete graph with weights `π(u) π(v) / d(u, v)`. The quality of a
//! dendrogram is the Kullback-Leibler divergence between the edge sampling
//! distribution of the original graph and that of the decoded one. For a
//! fixed tree the best heights have a closed form, which in turn yields a
//! reducible linkage for greedy agglomeration.
//!
//! * [`graph`]: edge-list parsing and the sampling distributions `p`, `π`.
//! * [`dendrogram`]: merge-list trees, ultrametric distances, cuts, JSON and Newick.
//! * [`clustering`]: naive and nearest-neighbor-chain agglomeration.
//! * [`metrics`]: cost `J`, optimal heights, tree objective, Dasgupta costs, modularity.
//! * [`reconstruction`]: the decoded graph and its edge-list export.
//! * [`oracle`]: exhaustive search over tree shapes for small graphs.
//! * [`cli`]: the `dendrograph` command line.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod clustering;
pub mod dendrogram;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod reconstruction;

pub use clustering::{agglomerate, agglomerate_naive, agglomerate_nn_chain, Algorithm};
pub use dendrogram::{Dendrogram, DendrogramError, Merge, Partition};
pub use graph::{GraphError, NodeId, NodePrior, PriorKind, WeightedGraph};
pub use metrics::{MetricsError, ScoreReport};
pub use reconstruction::ReconstructedGraph;
