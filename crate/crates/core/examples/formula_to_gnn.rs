//! Translating a formula into an equivalent GNN and comparing the two on
//! random graphs.
//!
//!     cargo run --example formula_to_gnn

use ksharp::formula::{parse, FormulaDag, Importer, NodeId};
use ksharp::graph::random_graph;
use ksharp::semantics::models;
use ksharp::transpile::{logic_to_gnn, SubformulaEnumeration};

fn main() {
    let f = parse("(#musician >= 1) & (#true >= 3 * #tubaplayer)").unwrap();
    let en = SubformulaEnumeration::new(&f, f.root());
    println!("subformulas in column order:");
    for (i, n) in en.nodes.iter().enumerate() {
        println!("  x{}: {}", i + 1, subformula(&f, *n));
    }
    let gnn = logic_to_gnn(&f);
    println!("{} layers, {} nonzero weights", gnn.num_layers(), gnn.nnz());

    let mut agree = 0;
    for seed in 0..200 {
        let g = random_graph(7, &["musician", "tubaplayer"], 0.3, seed);
        assert_eq!(gnn.classify(&g), models(&g, &f));
        agree += g.num_vertices();
    }
    println!("GNN and formula agree on {agree} pointed graphs");

    let small = parse("!(p | (8 <= 3 * #q))").unwrap();
    println!("{}", logic_to_gnn(&small).to_json());
}

fn subformula(f: &FormulaDag, n: NodeId) -> String {
    let mut d = FormulaDag::new();
    let r = Importer::new(f, true).formula(&mut d, n);
    d.set_root(r);
    d.to_string()
}
