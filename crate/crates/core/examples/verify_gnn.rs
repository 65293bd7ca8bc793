//! The four verification questions for a GNN and a formula: equivalence,
//! inclusion in both directions and non-empty intersection.
//!
//!     cargo run --example verify_gnn

use std::path::Path;

use ksharp::formula::parse;
use ksharp::gnn::GnnModel;
use ksharp::sat::SatOptions;
use ksharp::transpile::logic_to_gnn;
use ksharp::verify::{verify, TaskKind};

fn main() {
    let tubas = parse("(#musician >= 1) & (#true >= 3 * #tubaplayer)").unwrap();
    let a = logic_to_gnn(&tubas);
    let opts = SatOptions::default();
    let v = verify(TaskKind::P1, &a, &tubas, &opts);
    println!("translated GNN vs its formula, p1: {}", v.answer.name());

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/two_layer.json");
    let m = GnnModel::load(path).unwrap();
    let phi = parse("p1 | #p2 >= 1").unwrap();
    for kind in TaskKind::ALL {
        let v = verify(kind, &m, &phi, &opts);
        println!("{kind}: {}", v.answer.name());
        if let Some(c) = &v.certificate {
            println!("  certificate at {}: {}", c.graph.vertex_id(c.point), serde_json::to_string(&c.graph.to_value()).unwrap());
        }
    }
}
