//! Depth-efficient translation: a GNN whose layer count depends on the modal
//! depth rather than on the formula size.
//!
//!     cargo run --example shallow_gnn

use ksharp::formula::parse;
use ksharp::graph::random_graph;
use ksharp::semantics::models;
use ksharp::transpile::{logic_to_gnn, logic_to_gnn_shallow, ShallowOptions};

fn main() {
    let f = parse("(p | !q) & (#(p & q) >= 2 | [q] + #!p <= 1) & !(#(#q >= 1) >= 3)").unwrap();
    let deep = logic_to_gnn(&f);
    let shallow = logic_to_gnn_shallow(&f, &ShallowOptions::default()).unwrap();
    println!("modal depth {}", f.modal_depth(f.root()));
    println!("one layer per subformula: {} layers", deep.num_layers());
    println!("shallow: {} layers, {} neurons", shallow.num_layers(), shallow.num_neurons());
    for seed in 0..100 {
        let g = random_graph(6, &["p", "q"], 0.4, seed);
        assert_eq!(shallow.classify(&g), models(&g, &f));
    }
    println!("shallow GNN agrees with the formula on 100 random graphs");
}
