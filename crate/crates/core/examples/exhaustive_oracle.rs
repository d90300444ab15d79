//! Brute force over every binary tree shape of a small graph, compared
//! with the greedy tree.

use dendrograph::oracle::{greedy_gap, shape_count, Objective};
use dendrograph::{NodePrior, WeightedGraph};

fn main() {
    let g = WeightedGraph::parse_edge_list("a b 3\nb c 2\na c 2\nc d 0.5\nd e 2\ne f 3\nd f 2").unwrap();
    let prior = NodePrior::degree(&g);
    println!("{} shapes on {} leaves", shape_count(g.n()), g.n());

    for objective in [Objective::TreeObjective, Objective::Dasgupta] {
        let r = greedy_gap(&g, &prior, objective).unwrap();
        println!("{objective:?}");
        println!("  optimum {} score {:.6}", r.optimum.shape, r.optimum.score);
        println!("  greedy  {} score {:.6}", r.greedy_shape, r.greedy_score);
        println!("  gap {:.3e}", r.gap);
    }

    let path = WeightedGraph::parse_edge_list("a b\nb c").unwrap();
    let r = greedy_gap(&path, &NodePrior::degree(&path), Objective::TreeObjective).unwrap();
    println!("path a-b-c: optimum {} ({:.4}), greedy {} ({:.4})", r.optimum.shape, r.optimum.score, r.greedy_shape, r.greedy_score);
}
