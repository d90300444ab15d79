//! Scores a greedy tree and a hand-built alternative, before and after
//! moving to the best heights for each shape.

use dendrograph::metrics::{cost_j, optimal_heights, tree_objective, ScoreReport};
use dendrograph::{agglomerate_nn_chain, Dendrogram, Merge, NodePrior, WeightedGraph};

fn main() {
    let g = WeightedGraph::parse_edge_list("a b 3\nb c 2\na c 2\nc d 0.5\nd e 2\ne f 3\nd f 2").unwrap();
    let prior = NodePrior::degree(&g);

    let greedy = agglomerate_nn_chain(&g, &prior);
    let report = ScoreReport::compute(&g, &prior, &greedy).unwrap();
    println!("greedy tree");
    println!("  J = {:.6}, objective = {:.6}", report.cost_j, report.tree_objective);
    println!("  reconstruction KL = {:.6}, Dasgupta = {:.6}", report.kl_reconstruction, report.dasgupta);
    println!("  gap J + objective = {:.2e}", report.optimality_gap());

    // a caterpillar: leaves join one at a time, in label order
    let labels = g.labels().to_vec();
    let mut merges = vec![Merge { left: 0, right: 1, height: 1.0 }];
    for leaf in 2..g.n() {
        merges.push(Merge { left: g.n() + leaf - 2, right: leaf, height: leaf as f64 });
    }
    let caterpillar = Dendrogram::new(labels, merges).unwrap();
    println!("caterpillar");
    println!("  J with unit steps = {:.6}", cost_j(&g, &prior, &caterpillar).unwrap());
    let best = optimal_heights(&g, &prior, &caterpillar).unwrap();
    println!(
        "  J at optimal heights = {:.6} (regular: {})",
        cost_j(&g, &prior, &best.dendrogram).unwrap(),
        best.regular
    );
    println!("  objective = {:.6}", tree_objective(&g, &prior, &caterpillar).unwrap());
}
