use std::collections::HashMap;

use crate::formula::{FormulaDag, FormulaNode, Importer, NodeId, Slot};
use crate::graph::LabeledGraph;
use crate::semantics::evaluate;

use super::{box_upto_tree, drop_props, FreshNamer, NODE_PREFIX};

/// Where the `□^{≤m}` wrapper goes in the tree form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoxPlacement {
    /// `p_root ∧ □^{≤m} Ψ` with `Ψ` the conjunction of all definitions.
    #[default]
    Single,
    /// `p_root ∧ ⋀_n □^{≤m} (p_n ↔ cp(n))`.
    PerConjunct,
}

/// Which proposition stands for which node of the input.
#[derive(Clone, Debug)]
pub struct TreeTrace {
    pub input: FormulaDag,
    /// `(node of input, its proposition)`, children before parents.
    pub defs: Vec<(NodeId, String)>,
    /// Radius of the `□^{≤m}` wrapper.
    pub m: usize,
}

/// The tree form `p_root ∧ □^{≤m} Ψ` of the root of `dag`, where `Ψ` holds
/// one conjunct `p_n ↔ cp(n)` per formula node `n` and `cp(n)` is `n` with
/// its immediate subformulas replaced by their propositions.
pub fn dag_to_tree(dag: &FormulaDag) -> (FormulaDag, TreeTrace) {
    dag_to_tree_with(dag, BoxPlacement::Single)
}

pub fn dag_to_tree_with(dag: &FormulaDag, placement: BoxPlacement) -> (FormulaDag, TreeTrace) {
    let root = dag.root();
    let m = dag.modal_depth(root);
    let (fseen, _) = dag.reachable(root);
    let mut namer = FreshNamer::avoiding(dag);
    let mut defs = Vec::new();
    let mut name_of: HashMap<NodeId, String> = HashMap::new();
    for slot in dag.creation_order() {
        if let Slot::Formula(n) = *slot {
            if fseen[n.index()] {
                let name = namer.fresh(NODE_PREFIX);
                name_of.insert(n, name.clone());
                defs.push((n, name));
            }
        }
    }

    let mut out = FormulaDag::new();
    let mut conjuncts = Vec::new();
    match placement {
        BoxPlacement::Single => {
            let b = box_upto_tree(&mut out, m, &mut |dst| {
                let items: Vec<NodeId> = defs.iter().map(|(n, p)| definition(dag, &name_of, dst, *n, p)).collect();
                dst.and_all(&items).unwrap()
            });
            conjuncts.push(b);
        }
        BoxPlacement::PerConjunct => {
            for (n, p) in &defs {
                let b = box_upto_tree(&mut out, m, &mut |dst| definition(dag, &name_of, dst, *n, p));
                conjuncts.push(b);
            }
        }
    }
    let p_root = out.prop(&name_of[&root]);
    conjuncts.insert(0, p_root);
    let r = out.and_all(&conjuncts).unwrap();
    out.set_root(r);
    (out, TreeTrace { input: dag.clone(), defs, m })
}

/// `p ↔ cp(n)` with `cp(n)` built twice so that nothing is shared.
fn definition(
    dag: &FormulaDag,
    name_of: &HashMap<NodeId, String>,
    dst: &mut FormulaDag,
    n: NodeId,
    p: &str,
) -> NodeId {
    let c1 = copy_with_props(dag, name_of, dst, n);
    let c2 = copy_with_props(dag, name_of, dst, n);
    let a = dst.prop(p);
    let l = dst.implies(a, c1);
    let nc2 = dst.not(c2);
    let r = dst.or(nc2, a);
    dst.and(l, r)
}

fn copy_with_props(dag: &FormulaDag, name_of: &HashMap<NodeId, String>, dst: &mut FormulaDag, n: NodeId) -> NodeId {
    match dag.formula(n) {
        FormulaNode::Prop(p) => dst.prop(dag.prop_name(*p)),
        FormulaNode::Not(a) => {
            let a = dst.prop(&name_of[a]);
            dst.not(a)
        }
        FormulaNode::Or(a, b) => {
            let a = dst.prop(&name_of[a]);
            let b = dst.prop(&name_of[b]);
            dst.or(a, b)
        }
        FormulaNode::GeqZero(e) => {
            let mut imp = Importer::new(dag, false);
            let e = imp.expr_with(dst, e, &mut |d, child| Some(d.prop(&name_of[&child])));
            dst.geq_zero(e)
        }
    }
}

impl TreeTrace {
    /// Labels every vertex with the node propositions true there.
    pub fn forward(&self, g: &LabeledGraph) -> LabeledGraph {
        let val = evaluate(&self.input, self.input.root(), g);
        let mut out = g.clone();
        for (n, p) in &self.defs {
            for v in 0..g.num_vertices() {
                out.set_label(v, p, val.holds(*n, v));
            }
        }
        out
    }

    /// Forgets the node propositions.
    pub fn backward(&self, g: &LabeledGraph) -> LabeledGraph {
        drop_props(g, self.defs.iter().map(|(_, p)| p.as_str()))
    }

    pub fn fresh_props(&self) -> impl Iterator<Item = &str> {
        self.defs.iter().map(|(_, p)| p.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::graph::random_graph;
    use crate::semantics::check;

    // The conjunction is shared by the disjunction, the count and the indicator.
    const SHARED: &str = "def a := p & q; a | (#a <= [a])";

    fn box1(body: &str) -> String {
        format!("(({body}) & []({body}))")
    }

    #[test]
    fn shared_example_matches_per_conjunct_form() {
        let d = parse(SHARED).unwrap();
        let (t, trace) = dag_to_tree_with(&d, BoxPlacement::PerConjunct);
        assert!(t.is_tree());
        assert_eq!(trace.m, 1);
        // p, q, !p, !q, !p|!q, a, the atom, the root.
        assert_eq!(trace.defs.len(), 8);
        let bodies = [
            "@n0 <-> p",
            "@n1 <-> q",
            "@n2 <-> !@n0",
            "@n3 <-> !@n1",
            "@n4 <-> (@n2 | @n3)",
            "@n5 <-> !@n4",
            "@n6 <-> (#@n5 <= [@n5])",
            "@n7 <-> (@n5 | @n6)",
        ];
        let text = std::iter::once("@n7".to_string())
            .chain(bodies.iter().map(|b| box1(b)))
            .collect::<Vec<_>>()
            .join(" & ");
        let expected = parse(&text).unwrap();
        let props = ["p", "q", "@n0", "@n1", "@n2", "@n3", "@n4", "@n5", "@n6", "@n7"];
        for seed in 0..200 {
            let g = trace.forward(&random_graph(4, &["p", "q"], 0.4, seed));
            let h = random_graph(3, &props, 0.5, seed);
            for g in [&g, &h] {
                for u in 0..g.num_vertices() {
                    assert_eq!(check(g, u, &t), check(g, u, &expected));
                }
            }
        }
    }

    #[test]
    fn single_and_per_conjunct_agree() {
        let d = parse(SHARED).unwrap();
        let (s, _) = dag_to_tree(&d);
        let (c, trace) = dag_to_tree_with(&d, BoxPlacement::PerConjunct);
        for seed in 0..100 {
            let g = trace.forward(&random_graph(5, &["p", "q"], 0.4, seed));
            for u in 0..5 {
                assert_eq!(check(&g, u, &s), check(&g, u, &c));
            }
        }
    }

    #[test]
    fn forward_and_backward_maps() {
        let d = parse(SHARED).unwrap();
        let (t, trace) = dag_to_tree(&d);
        for seed in 0..100 {
            let g = random_graph(5, &["p", "q"], 0.4, seed);
            let fg = trace.forward(&g);
            let back = trace.backward(&fg);
            assert_eq!(back, g);
            for u in 0..5 {
                assert_eq!(check(&g, u, &d), check(&fg, u, &t));
            }
        }
    }

    #[test]
    fn tree_input_stays_tree() {
        let d = parse("p & #q >= 2").unwrap();
        let (t, _) = dag_to_tree(&d);
        assert!(t.is_tree());
        assert!(t.modal_depth(t.root()) <= 2 * d.modal_depth(d.root()));
    }

    #[test]
    fn propositional_input_has_no_box() {
        let d = parse("p | !p").unwrap();
        let (t, trace) = dag_to_tree(&d);
        assert_eq!(trace.m, 0);
        assert_eq!(t.modal_depth(t.root()), 0);
    }
}
