//! JSON and Newick round trips.

use dendrograph::{agglomerate_nn_chain, Dendrogram, NodePrior, WeightedGraph};

fn main() {
    let g = WeightedGraph::parse_edge_list("a b\nb c").unwrap();
    let d = agglomerate_nn_chain(&g, &NodePrior::degree(&g));

    let json = d.to_json();
    println!("json:   {json}");
    assert_eq!(Dendrogram::from_json(&json).unwrap(), d);

    let newick = d.to_newick();
    println!("newick: {newick}");
    let back = Dendrogram::from_newick(&newick).unwrap().relabel_to(d.labels()).unwrap();
    assert_eq!(back.ultrametric_matrix(), d.ultrametric_matrix());

    // trees from elsewhere, with labels that need quoting
    let outside = Dendrogram::from_newick("(('left leaf':1,right:1):2,(x:2,y:2):1);").unwrap();
    println!("parsed: {} leaves, heights {:?}", outside.n_leaves(), outside.heights().collect::<Vec<_>>());
    println!("again:  {}", outside.to_newick());

    match Dendrogram::from_json(r#"{"labels":["a","b","c"],"merges":[[0,1,0.9],[3,2,0.5]],"n_leaves":3}"#) {
        Ok(_) => unreachable!("a parent below its child is rejected"),
        Err(e) => println!("rejected: {e}"),
    }
}
