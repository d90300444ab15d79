//! How the node prior shapes the tree: degree, uniform and a custom prior
//! that makes one hub node heavy.

use dendrograph::{agglomerate_nn_chain, NodePrior, WeightedGraph};

fn main() {
    // a hub joined to every node of a loose ring
    let g = WeightedGraph::parse_edge_list("hub a\nhub b\nhub c\nhub d\na b 2\nc d 2\nb c 0.5").unwrap();
    let mut heavy_hub = vec![1.0; g.n()];
    heavy_hub[g.node_of("hub").unwrap()] = 10.0;
    let priors = [
        ("degree", NodePrior::degree(&g)),
        ("uniform", NodePrior::uniform(g.n())),
        ("heavy hub", NodePrior::custom(&heavy_hub).unwrap()),
    ];
    for (name, prior) in priors {
        let d = agglomerate_nn_chain(&g, &prior);
        let first = &d.merges()[0];
        let blocks: Vec<String> = d
            .cut_k(2)
            .unwrap()
            .blocks()
            .iter()
            .map(|b| b.iter().map(|&u| g.label(u)).collect::<Vec<_>>().join(","))
            .collect();
        println!(
            "{name:>9}: first merge {}+{} at {:.3}; two clusters {}",
            g.label(d.min_leaf(first.left)),
            g.label(d.min_leaf(first.right)),
            first.height,
            blocks.join(" / ")
        );
    }
}
