//! Flat partitions from a dendrogram, by cluster count and by height, with
//! the modularity of each.

use dendrograph::metrics::{max_resolution, modularity};
use dendrograph::{agglomerate_nn_chain, NodePrior, WeightedGraph};

fn main() {
    let g = WeightedGraph::parse_edge_list("a b 3\nb c 2\na c 2\nc d 0.5\nd e 2\ne f 3\nd f 2").unwrap();
    let prior = NodePrior::degree(&g);
    let d = agglomerate_nn_chain(&g, &prior);

    for k in 1..=g.n() {
        let p = d.cut_k(k).unwrap();
        let q = modularity(&g, &prior, &p, 1.0).unwrap();
        let blocks: Vec<String> =
            p.blocks().iter().map(|b| b.iter().map(|&u| g.label(u)).collect::<Vec<_>>().join("")).collect();
        print!("k = {k}: {:<20} Q = {q:+.4}", blocks.join(" | "));
        if k > 1 {
            // the resolution at which merging the closest two blocks pays off
            let r = max_resolution(&g, &prior, &p).unwrap();
            print!("  next merge at resolution {:.4}", r.value);
        }
        println!();
    }

    let h = d.merges()[2].height;
    println!("cut at height {h:.4}: {} blocks", d.cut_height(h).len());
}
