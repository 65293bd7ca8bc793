//! Model checking a formula on a small labeled graph, both from files and
//! with a formula built in code.
//!
//!     cargo run --example model_check

use std::path::Path;

use ksharp::formula::{parse, FormulaDag};
use ksharp::graph::LabeledGraph;
use ksharp::semantics::{check, models};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let g = LabeledGraph::load(dir.join("small.json")).unwrap();
    let text = std::fs::read_to_string(dir.join("small.ks")).unwrap();
    let f = parse(&text).unwrap();
    let u = g.vertex_index("u").unwrap();
    println!("{} at u: {}", f, check(&g, u, &f));

    // p ∧ ◇≥2 ¬p built through the dag API
    let mut d = FormulaDag::new();
    let p = d.prop("p");
    let not_p = d.not(p);
    let two = d.diamond_geq(2, not_p);
    let root = d.and(p, two);
    d.set_root(root);
    for (v, holds) in models(&g, &d).iter().enumerate() {
        println!("  {}: {}", g.vertex_id(v), holds);
    }
}
