#![allow(dead_code)]

use std::path::PathBuf;

use ksharp::formula::{parse, FormulaDag};
use ksharp::random::FormulaGen;

pub const PROP_POOL: [&str; 4] = ["p", "q", "r", "s"];

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn fixture_formula(name: &str) -> FormulaDag {
    parse(&fixture_text(name)).unwrap()
}

/// Number of propositions for corpus entry `i`: mostly two or three, one in
/// ten with a single proposition.
fn corpus_props(i: u64) -> usize {
    match i % 10 {
        0 => 1,
        1..=5 => 2,
        _ => 3,
    }
}

/// Seeded corpus of small formulas: at most 25 nodes, modal depth at most 2,
/// shared subformulas and indicator terms.
pub fn corpus(n: usize) -> Vec<FormulaDag> {
    (0..n as u64)
        .map(|i| {
            let k = corpus_props(i);
            FormulaGen::new(&PROP_POOL[..k]).generate_seeded(1000 + i)
        })
        .collect()
}
