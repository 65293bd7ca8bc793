//! The satisfiability-preserving rewriting chain: tree form, indicator
//! elimination and normalized counting atoms, with the model maps between
//! stages.
//!
//!     cargo run --example reductions

use ksharp::formula::parse;
use ksharp::graph::LabeledGraph;
use ksharp::reductions::{dag_to_tree, eliminate_ones, eml_normal_atoms};
use ksharp::semantics::check;

fn main() {
    let f = parse("def a := p & q; a | (#a <= [a])").unwrap();
    println!("input: {f} ({} nodes)", f.size());

    let (t, tt) = dag_to_tree(&f);
    let (o, ot) = eliminate_ones(&t);
    let e = eml_normal_atoms(&o);
    println!("tree: {} nodes, fresh {:?}", t.size(), tt.fresh_props().collect::<Vec<_>>());
    println!("indicator-free: {} nodes, fresh {:?}", o.size(), ot.fresh_props().collect::<Vec<_>>());
    println!("normalized: {} nodes", e.size());

    // a lone p∧q point with no successors satisfies `a`
    let mut g = LabeledGraph::with_props(&["p", "q"]);
    g.add_vertex("v", &["p", "q"]);
    assert!(check(&g, 0, &f));
    let g1 = tt.forward(&g);
    let g2 = ot.forward(&g1);
    println!("forward image: {} vertices, {} edges", g2.num_vertices(), g2.num_edges());
    assert!(check(&g1, 0, &t) && check(&g2, 0, &o) && check(&g2, 0, &e));
    let back = tt.backward(&ot.backward(&g2));
    assert!(check(&back, 0, &f));
    println!("every stage holds at v, and the backward image satisfies the input again");
}
