//! Satisfiability-preserving reductions: shared dags to trees, removal of
//! `1_φ` indicators, and normalization of atoms to counting sums.
//!
//! Each stage records what it introduced so that models can be carried in
//! both directions: a model of the input is mapped to a model of the output
//! (`forward`), and a model of the output back to a model of the input
//! (`backward`).

mod eml;
mod ones;
mod tree;

use std::collections::HashSet;

use crate::formula::{FormulaDag, NodeId};
use crate::graph::LabeledGraph;

pub use eml::eml_normal_atoms;
pub use ones::{eliminate_ones, OnesRound, OnesTrace};
pub use tree::{dag_to_tree, dag_to_tree_with, BoxPlacement, TreeTrace};

/// Prefix of propositions standing for dag nodes.
pub const NODE_PREFIX: &str = "@n";
/// Prefix of propositions marking impure successors.
pub const ONE_PREFIX: &str = "@one";

/// Hands out proposition names that avoid a set of taken names.
#[derive(Clone, Debug, Default)]
pub struct FreshNamer {
    taken: HashSet<String>,
    counter: usize,
}

impl FreshNamer {
    pub fn new<S: AsRef<str>>(taken: &[S]) -> Self {
        FreshNamer { taken: taken.iter().map(|s| s.as_ref().to_string()).collect(), counter: 0 }
    }

    pub fn avoiding(dag: &FormulaDag) -> Self {
        FreshNamer::new(dag.propositions())
    }

    pub fn fresh(&mut self, prefix: &str) -> String {
        loop {
            let name = format!("{prefix}{}", self.counter);
            self.counter += 1;
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }
}

/// `□^{≤m} φ` without sharing: `build` is called once per conjunct
/// `□^i φ`, `0 <= i <= m`, and must return a fresh copy of `φ`.
pub fn box_upto_tree(dst: &mut FormulaDag, m: usize, build: &mut dyn FnMut(&mut FormulaDag) -> NodeId) -> NodeId {
    let mut conj = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let mut f = build(dst);
        for _ in 0..i {
            f = dst.box_(f);
        }
        conj.push(f);
    }
    dst.and_all(&conj).unwrap()
}

/// The three stages chained: tree, then 1-free, then normalized atoms.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub tree: TreeTrace,
    pub ones: OnesTrace,
    pub output: FormulaDag,
}

/// Runs the full reduction chain on the root of `dag`.
pub fn reduce(dag: &FormulaDag) -> Reduction {
    let (t, tree) = dag_to_tree(dag);
    let (o, ones) = eliminate_ones(&t);
    let output = eml_normal_atoms(&o);
    Reduction { tree, ones, output }
}

impl Reduction {
    /// Maps a model of the input (at any vertex) to a model of the output
    /// at the same vertex index.
    pub fn forward(&self, g: &LabeledGraph) -> LabeledGraph {
        let g = self.tree.forward(g);
        self.ones.forward(&g)
    }

    /// Maps a model of the output back to a model of the input at the same
    /// vertex index.
    pub fn backward(&self, g: &LabeledGraph) -> LabeledGraph {
        let g = self.ones.backward(g);
        self.tree.backward(&g)
    }
}

/// `g` without the named propositions.
pub(crate) fn drop_props<'a>(g: &LabeledGraph, names: impl IntoIterator<Item = &'a str>) -> LabeledGraph {
    let drop: HashSet<&str> = names.into_iter().collect();
    let keep: Vec<&String> = g.propositions().iter().filter(|p| !drop.contains(p.as_str())).collect();
    let mut out = LabeledGraph::with_props(&keep);
    for v in 0..g.num_vertices() {
        let labels: Vec<&str> = g.labels_of(v).into_iter().filter(|p| !drop.contains(p)).collect();
        out.add_vertex(g.vertex_id(v), &labels);
    }
    for (u, v) in g.edges() {
        out.add_edge(u, v);
    }
    out
}

/// Vertex ids `@v<k>` not yet used in `g`.
pub(crate) fn fresh_vertex_id(g: &LabeledGraph, counter: &mut usize) -> String {
    loop {
        let id = format!("@v{counter}");
        *counter += 1;
        if g.vertex_index(&id).is_none() {
            return id;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn fresh_names_skip_taken() {
        let mut n = FreshNamer::new(&["@n0", "@n2", "p"]);
        assert_eq!(n.fresh(NODE_PREFIX), "@n1");
        assert_eq!(n.fresh(NODE_PREFIX), "@n3");
        assert_eq!(n.fresh(ONE_PREFIX), "@one4");
    }

    #[test]
    fn box_upto_tree_has_no_sharing() {
        let mut d = parse("p | q").unwrap();
        let src = d.clone();
        let root = box_upto_tree(&mut d, 3, &mut |dst| {
            let mut imp = crate::formula::Importer::new(&src, false);
            imp.formula(dst, src.root())
        });
        d.set_root(root);
        assert!(d.is_tree());
        assert_eq!(d.modal_depth(root), 3);
    }
}
