//! Deciding satisfiability, with witness models and resource budgets.
//!
//!     cargo run --example satisfiability

use std::time::Duration;

use ksharp::formula::parse;
use ksharp::sat::{satisfiable_with, valid, Budget, SatOptions, SatOutcome, Strategy};
use ksharp::semantics::check;

fn main() {
    for text in [
        "(#musician >= 1) & (#true >= 3 * #tubaplayer)",
        "#p >= #q + 1 & #(p & q) >= #p",
        "#(p & !q) >= 2 & [#p <= 1] >= 1",
    ] {
        let f = parse(text).unwrap();
        for strategy in [Strategy::Direct, Strategy::Reductions] {
            let opts = SatOptions { strategy, ..SatOptions::default() };
            let report = satisfiable_with(&f, &opts);
            match &report.outcome {
                SatOutcome::Sat(m) => {
                    assert!(check(&m.graph, m.point, &f));
                    println!("{text}  [{strategy:?}] sat, witness with {} vertices", m.graph.num_vertices());
                }
                SatOutcome::Unsat => println!("{text}  [{strategy:?}] unsat"),
                SatOutcome::ResourceExhausted(r) => println!("{text}  [{strategy:?}] gave up: {r}"),
            }
        }
    }

    let tautology = parse("(#p >= 2) -> (#true >= 2)").unwrap();
    println!("validity of #p >= 2 -> #true >= 2: {:?}", valid(&tautology, &Budget::default()).holds());

    let tight = Budget { max_branches: 0, time_limit: Some(Duration::from_millis(50)), ..Budget::default() };
    let hard = parse("(p | q) & (!p | r) & (#(p | r) >= 2) & (#(!p & q) >= 1)").unwrap();
    println!("with no branching allowed: {:?}", ksharp::sat::satisfiable(&hard, &tight));
}
