//! Greedy clustering of a small weighted graph with both algorithms and
//! both built-in priors.

use dendrograph::{agglomerate, Algorithm, NodePrior, WeightedGraph};

const GRAPH: &str = "\
# two dense groups joined by a weak bridge
a b 3
b c 2
a c 2
c d 0.5
d e 2
e f 3
d f 2
";

fn main() {
    let g = WeightedGraph::parse_edge_list(GRAPH).expect("valid edge list");
    for prior in [NodePrior::degree(&g), NodePrior::uniform(g.n())] {
        let naive = agglomerate(&g, &prior, Algorithm::Naive);
        let chain = agglomerate(&g, &prior, Algorithm::NnChain);
        assert_eq!(naive.merges().len(), chain.merges().len());
        println!("{:?} prior", prior.kind());
        for (k, m) in chain.merges().iter().enumerate() {
            let members: Vec<&str> = chain.leaves(g.n() + k).iter().map(|&u| g.label(u)).collect();
            println!("  merge {k}: {} + {} at {:.4} -> {{{}}}", m.left, m.right, m.height, members.join(","));
        }
    }
}
