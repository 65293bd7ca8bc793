use std::collections::HashMap;

use crate::formula::{structural_key, ExprId, ExprNode, FormulaDag, FormulaNode, NodeId, Slot};
use crate::graph::LabeledGraph;
use crate::semantics::evaluate;

use super::{box_upto_tree, drop_props, fresh_vertex_id, FreshNamer, ONE_PREFIX};

/// One elimination round: every indicator `1_χ` with `χ` indicator-free
/// is replaced by `#p_χ`, where `p_χ` marks a single impure successor.
#[derive(Clone, Debug)]
pub struct OnesRound {
    pub input: FormulaDag,
    /// `(χ in input, p_χ)`; structurally equal `χ` share one proposition.
    pub chis: Vec<(NodeId, String)>,
    /// Radius of the guards.
    pub m: usize,
}

#[derive(Clone, Debug, Default)]
pub struct OnesTrace {
    pub rounds: Vec<OnesRound>,
}

/// An equisatisfiable formula without `1_φ`.
///
/// Rounds go innermost first. With `imp = p_1 ∨ … ∨ p_K` for the round's
/// indicator propositions, a round outputs
/// `¬imp ∧ τ(φ) ∧ ⋀_i □^{≤m}(¬imp → ((τχ_i → #p_i = 1) ∧ (¬τχ_i → #p_i = 0)))`
/// where `τ(1_{χ_i}) = #p_i` and `τ(#ψ) = #(τψ ∧ ¬imp)`, and `m` is the
/// modal depth of the round's input.
pub fn eliminate_ones(dag: &FormulaDag) -> (FormulaDag, OnesTrace) {
    let mut namer = FreshNamer::avoiding(dag);
    let mut trace = OnesTrace::default();
    let mut cur = dag.clone();
    while let Some((next, round)) = eliminate_round(&cur, &mut namer) {
        trace.rounds.push(round);
        cur = next;
    }
    (cur, trace)
}

fn eliminate_round(dag: &FormulaDag, namer: &mut FreshNamer) -> Option<(FormulaDag, OnesRound)> {
    let root = dag.root();
    let (_, eseen) = dag.reachable(root);
    let mut free_f = vec![true; dag.num_formula_nodes()];
    let mut free_e = vec![true; dag.num_expr_nodes()];
    let mut chis: Vec<(NodeId, String)> = Vec::new();
    let mut by_key: HashMap<String, usize> = HashMap::new();
    let mut slot_of: HashMap<NodeId, usize> = HashMap::new();
    for slot in dag.creation_order() {
        match *slot {
            Slot::Formula(id) => {
                free_f[id.index()] = match dag.formula(id) {
                    FormulaNode::Prop(_) => true,
                    FormulaNode::Not(a) => free_f[a.index()],
                    FormulaNode::Or(a, b) => free_f[a.index()] && free_f[b.index()],
                    FormulaNode::GeqZero(e) => free_e[e.index()],
                }
            }
            Slot::Expr(i) => {
                let i = i as usize;
                free_e[i] = match dag.expr_at(i) {
                    ExprNode::Const(_) => true,
                    ExprNode::One(f) => {
                        if eseen[i] && free_f[f.index()] && !slot_of.contains_key(f) {
                            let key = structural_key(dag, *f);
                            let k = *by_key.entry(key).or_insert_with(|| {
                                chis.push((*f, namer.fresh(ONE_PREFIX)));
                                chis.len() - 1
                            });
                            slot_of.insert(*f, k);
                        }
                        false
                    }
                    ExprNode::Count(f) => free_f[f.index()],
                    ExprNode::Add(a, b) => free_e[a.index()] && free_e[b.index()],
                    ExprNode::Scale(_, a) => free_e[a.index()],
                }
            }
        }
    }
    if chis.is_empty() {
        return None;
    }
    let m = dag.modal_depth(root);
    let names: Vec<String> = chis.iter().map(|(_, p)| p.clone()).collect();
    let mut out = FormulaDag::new();
    let tau = Tau { src: dag, slot_of: &slot_of, names: &names };

    let mut conj = Vec::new();
    let imp = tau.impure(&mut out);
    conj.push(out.not(imp));
    conj.push(tau.formula(&mut out, root, &mut HashMap::new()));
    for (chi, p) in &chis {
        let g = box_upto_tree(&mut out, m, &mut |dst| {
            let imp = tau.impure(dst);
            let c1 = tau.formula(dst, *chi, &mut HashMap::new());
            let c2 = tau.formula(dst, *chi, &mut HashMap::new());
            let one = exactly(dst, p, 1);
            let zero = exactly(dst, p, 0);
            let pos = dst.implies(c1, one);
            let nc2 = dst.not(c2);
            let neg = dst.implies(nc2, zero);
            let body = dst.and(pos, neg);
            let pure = dst.not(imp);
            dst.implies(pure, body)
        });
        conj.push(g);
    }
    let r = out.and_all(&conj).unwrap();
    out.set_root(r);
    Some((out, OnesRound { input: dag.clone(), chis, m }))
}

/// `#p = k` for `k ∈ {0, 1}`: `(#p >= 1) ∧ (-1 * #p + 1 >= 0)`, or `-1 * #p >= 0`.
fn exactly(dst: &mut FormulaDag, p: &str, k: i64) -> NodeId {
    let neg = {
        let a = dst.prop(p);
        let c = dst.count(a);
        let s = dst.scale(-1, c);
        let e = if k == 0 {
            s
        } else {
            let k = dst.constant(k);
            dst.add(s, k)
        };
        dst.geq_zero(e)
    };
    if k == 0 {
        return neg;
    }
    let a = dst.prop(p);
    let c = dst.count(a);
    let k = dst.constant(k);
    let pos = dst.ge(c, k);
    dst.and(pos, neg)
}

struct Tau<'a> {
    src: &'a FormulaDag,
    slot_of: &'a HashMap<NodeId, usize>,
    names: &'a [String],
}

impl Tau<'_> {
    fn impure(&self, dst: &mut FormulaDag) -> NodeId {
        let ps: Vec<NodeId> = self.names.iter().map(|p| dst.prop(p)).collect();
        dst.or_all(&ps).unwrap()
    }

    fn formula(&self, dst: &mut FormulaDag, node: NodeId, memo: &mut HashMap<NodeId, NodeId>) -> NodeId {
        if let Some(n) = memo.get(&node) {
            return *n;
        }
        let out = match self.src.formula(node) {
            FormulaNode::Prop(p) => dst.prop(self.src.prop_name(*p)),
            FormulaNode::Not(a) => {
                let a = self.formula(dst, *a, memo);
                dst.not(a)
            }
            FormulaNode::Or(a, b) => {
                let a = self.formula(dst, *a, memo);
                let b = self.formula(dst, *b, memo);
                dst.or(a, b)
            }
            FormulaNode::GeqZero(e) => {
                let e = self.expr(dst, e, memo);
                dst.geq_zero(e)
            }
        };
        memo.insert(node, out);
        out
    }

    fn expr(&self, dst: &mut FormulaDag, e: &ExprId, memo: &mut HashMap<NodeId, NodeId>) -> ExprId {
        match self.src.expr(e) {
            ExprNode::Const(c) => dst.constant(c.clone()),
            ExprNode::One(f) => match self.slot_of.get(f) {
                Some(k) => {
                    let p = dst.prop(&self.names[*k]);
                    dst.count(p)
                }
                None => {
                    let f = self.formula(dst, *f, memo);
                    dst.one(f)
                }
            },
            ExprNode::Count(f) => {
                let f = self.formula(dst, *f, memo);
                let imp = self.impure(dst);
                let pure = dst.not(imp);
                let both = dst.and(f, pure);
                dst.count(both)
            }
            ExprNode::Add(a, b) => {
                let a = self.expr(dst, a, memo);
                let b = self.expr(dst, b, memo);
                dst.add(a, b)
            }
            ExprNode::Scale(c, a) => {
                let a = self.expr(dst, a, memo);
                dst.scale(c.clone(), a)
            }
        }
    }
}

impl OnesRound {
    /// Gives every vertex one fresh successor labeled `p_χ` for each `χ`
    /// true there.
    pub fn forward(&self, g: &LabeledGraph) -> LabeledGraph {
        let val = evaluate(&self.input, self.input.root(), g);
        let mut out = g.clone();
        for (_, p) in &self.chis {
            out.add_prop(p);
        }
        let mut counter = 0;
        for v in 0..g.num_vertices() {
            for (chi, p) in &self.chis {
                if val.holds(*chi, v) {
                    let id = fresh_vertex_id(&out, &mut counter);
                    let w = out.add_vertex(&id, &[p.as_str()]);
                    out.add_edge(v, w);
                }
            }
        }
        out
    }

    /// Cuts every edge into a vertex carrying one of the round's propositions.
    pub fn backward(&self, g: &LabeledGraph) -> LabeledGraph {
        let marks: Vec<usize> = self.chis.iter().filter_map(|(_, p)| g.prop_index(p)).collect();
        let impure: Vec<bool> = (0..g.num_vertices()).map(|v| marks.iter().any(|p| g.label(v, *p))).collect();
        let mut out = g.clone();
        let cut: Vec<(usize, usize)> = g.edges().filter(|(_, w)| impure[*w]).collect();
        for (u, w) in cut {
            out.remove_edge(u, w);
        }
        out
    }
}

impl OnesTrace {
    pub fn forward(&self, g: &LabeledGraph) -> LabeledGraph {
        let mut g = g.clone();
        for r in &self.rounds {
            g = r.forward(&g);
        }
        g
    }

    /// Cuts edges into impure vertices round by round, latest first, then
    /// forgets the indicator propositions. Impure vertices stay, unreachable.
    pub fn backward(&self, g: &LabeledGraph) -> LabeledGraph {
        let mut g = g.clone();
        for r in self.rounds.iter().rev() {
            g = r.backward(&g);
        }
        drop_props(&g, self.fresh_props())
    }

    pub fn fresh_props(&self) -> impl Iterator<Item = &str> {
        self.rounds.iter().flat_map(|r| r.chis.iter().map(|(_, p)| p.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::graph::random_graph;
    use crate::semantics::check;

    fn round_trip(src: &str, props: &[&str], n: usize) {
        let d = parse(src).unwrap();
        let (o, trace) = eliminate_ones(&d);
        assert!(o.is_one_free(o.root()), "{o}");
        for seed in 0..60 {
            let g = random_graph(n, props, 0.4, seed);
            let fg = trace.forward(&g);
            for u in 0..n {
                if check(&g, u, &d) {
                    assert!(check(&fg, u, &o), "forward fails on {src} at seed {seed}");
                }
                // Any model of the output maps back.
                if check(&fg, u, &o) {
                    let back = trace.backward(&fg);
                    assert!(check(&back, u, &d));
                }
            }
        }
    }

    #[test]
    fn single_indicator() {
        let d = parse("[q] >= 1").unwrap();
        let (o, trace) = eliminate_ones(&d);
        assert_eq!(trace.rounds.len(), 1);
        assert_eq!(trace.rounds[0].m, 0);
        assert_eq!(trace.rounds[0].chis[0].1, "@one0");
        let expected = parse(
            "!@one0 & (#@one0 >= 1)
             & (!@one0 -> ((q -> (#@one0 >= 1 & -1 * #@one0 + 1 >= 0)) & (!q -> -1 * #@one0 >= 0)))",
        )
        .unwrap();
        for seed in 0..100 {
            let g = random_graph(4, &["q", "@one0"], 0.5, seed);
            for u in 0..4 {
                assert_eq!(check(&g, u, &o), check(&g, u, &expected));
            }
        }
        round_trip("[q] >= 1", &["q"], 4);
    }

    #[test]
    fn no_indicators_is_a_fixpoint() {
        let d = parse("#p >= 2 | !q").unwrap();
        let (o, trace) = eliminate_ones(&d);
        assert!(trace.rounds.is_empty());
        assert_eq!(o.to_string(), d.to_string());
    }

    #[test]
    fn nested_indicators_take_two_rounds() {
        let src = "[p & ([q] + #q >= 2)] + #([r] >= 1) >= 1";
        let d = parse(src).unwrap();
        let (_, trace) = eliminate_ones(&d);
        assert_eq!(trace.rounds.len(), 2);
        round_trip(src, &["p", "q", "r"], 4);
    }

    #[test]
    fn indicator_of_dead_end() {
        // Both indicators can hold at a point, and at the added successors.
        round_trip("([#true <= 0] >= 1) & ([q] >= 1)", &["q"], 3);
        round_trip("#([!q] >= 1) >= 2 & [#q >= 1] >= 1", &["q"], 4);
    }
}
