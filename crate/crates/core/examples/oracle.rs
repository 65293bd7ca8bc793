//! Exhaustive search for small models, the ground truth used to test the
//! decision procedure.
//!
//!     cargo run --example oracle

use ksharp::formula::parse;
use ksharp::oracle::{find_model, SearchBound};
use ksharp::sat::{satisfiable, Budget};

fn main() {
    for text in ["#p >= 2 & #!p >= 1", "[#p >= 1] + #q >= 3", "#(#p >= 1) >= 1 & !(#p >= 1) & p"] {
        let f = parse(text).unwrap();
        let bound = SearchBound::for_formula(&f);
        let found = find_model(&f, &bound).unwrap();
        let decided = satisfiable(&f, &Budget::default());
        match found {
            Some(m) => println!("{text}: model {}", serde_json::to_string(&m.graph.to_value()).unwrap()),
            None => println!("{text}: no model with at most {} vertices", bound.max_vertices),
        }
        println!("  decision procedure: sat = {}", decided.is_sat());
    }
}
