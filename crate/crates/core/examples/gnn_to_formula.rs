//! Reading a GNN from JSON and turning it into an equivalent formula.
//!
//!     cargo run --example gnn_to_formula

use std::path::Path;

use ksharp::gnn::GnnModel;
use ksharp::graph::random_graph;
use ksharp::semantics::models;
use ksharp::transpile::gnn_to_logic;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/two_layer.json");
    let m = GnnModel::load(path).unwrap();
    let f = gnn_to_logic(&m);
    println!("{f}");
    println!("{} nodes, modal depth {}", f.size(), f.modal_depth(f.root()));
    for seed in 0..100 {
        let g = random_graph(6, &["p1", "p2"], 0.4, seed);
        assert_eq!(models(&g, &f), m.classify(&g));
    }
    println!("formula and GNN agree on 100 random graphs");
}
