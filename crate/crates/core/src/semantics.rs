//! Model checking: truth of formulas and values of expressions at every
//! vertex of a labeled graph.

use num_traits::{Signed, Zero};

use crate::formula::{ExprId, ExprNode, FormulaDag, FormulaNode, NodeId, Slot};
use crate::graph::LabeledGraph;
use crate::Int;

/// Truth values of formula nodes and values of expression nodes at every
/// vertex. Nodes not reachable from the evaluated root have empty rows.
#[derive(Clone, Debug)]
pub struct Valuation {
    formulas: Vec<Vec<bool>>,
    exprs: Vec<Vec<Int>>,
}

impl Valuation {
    pub fn holds(&self, node: NodeId, v: usize) -> bool {
        self.formulas[node.index()][v]
    }

    pub fn value(&self, e: &ExprId, v: usize) -> &Int {
        &self.exprs[e.index()][v]
    }

    /// The row of `node`, one entry per vertex.
    pub fn truth_row(&self, node: NodeId) -> &[bool] {
        &self.formulas[node.index()]
    }
}

/// Evaluates everything reachable from `root` bottom-up, one node at a time
/// over all vertices. Propositions missing from the graph are false.
pub fn evaluate(dag: &FormulaDag, root: NodeId, g: &LabeledGraph) -> Valuation {
    let n = g.num_vertices();
    let (fseen, eseen) = dag.reachable(root);
    let mut formulas: Vec<Vec<bool>> = vec![Vec::new(); dag.num_formula_nodes()];
    let mut exprs: Vec<Vec<Int>> = vec![Vec::new(); dag.num_expr_nodes()];
    for slot in dag.creation_order() {
        match *slot {
            Slot::Formula(id) => {
                if !fseen[id.index()] {
                    continue;
                }
                let row = match dag.formula(id) {
                    FormulaNode::Prop(p) => match g.prop_index(dag.prop_name(*p)) {
                        Some(gp) => (0..n).map(|v| g.label(v, gp)).collect(),
                        None => vec![false; n],
                    },
                    FormulaNode::Not(a) => formulas[a.index()].iter().map(|x| !x).collect(),
                    FormulaNode::Or(a, b) => formulas[a.index()]
                        .iter()
                        .zip(&formulas[b.index()])
                        .map(|(x, y)| *x || *y)
                        .collect(),
                    FormulaNode::GeqZero(e) => exprs[e.index()].iter().map(|x| !x.is_negative()).collect(),
                };
                formulas[id.index()] = row;
            }
            Slot::Expr(i) => {
                let i = i as usize;
                if !eseen[i] {
                    continue;
                }
                let row: Vec<Int> = match dag.expr_at(i) {
                    ExprNode::Const(c) => vec![c.clone(); n],
                    ExprNode::One(f) => formulas[f.index()]
                        .iter()
                        .map(|x| if *x { Int::from(1) } else { Int::zero() })
                        .collect(),
                    ExprNode::Count(f) => {
                        let t = &formulas[f.index()];
                        (0..n)
                            .map(|u| Int::from(g.successors(u).iter().filter(|v| t[**v]).count()))
                            .collect()
                    }
                    ExprNode::Add(a, b) => exprs[a.index()]
                        .iter()
                        .zip(&exprs[b.index()])
                        .map(|(x, y)| x + y)
                        .collect(),
                    ExprNode::Scale(c, a) => exprs[a.index()].iter().map(|x| c * x).collect(),
                };
                exprs[i] = row;
            }
        }
    }
    Valuation { formulas, exprs }
}

/// `(G, u) ⊨ φ` for the root of `dag`.
pub fn check(g: &LabeledGraph, u: usize, dag: &FormulaDag) -> bool {
    check_node(g, u, dag, dag.root())
}

pub fn check_node(g: &LabeledGraph, u: usize, dag: &FormulaDag, node: NodeId) -> bool {
    evaluate(dag, node, g).holds(node, u)
}

/// Vertices satisfying the root of `dag`.
pub fn models(g: &LabeledGraph, dag: &FormulaDag) -> Vec<bool> {
    let root = dag.root();
    evaluate(dag, root, g).truth_row(root).to_vec()
}

/// `[[ξ]]_{G,u}`.
pub fn eval_expr(g: &LabeledGraph, u: usize, dag: &FormulaDag, e: &ExprId) -> Int {
    Direct { dag, g }.expr(e, u)
}

/// Direct recursive evaluation without sharing of work across vertices or
/// nodes. Exponential on heavily shared dags; used to cross-check [`evaluate`].
pub fn check_uncached(g: &LabeledGraph, u: usize, dag: &FormulaDag, node: NodeId) -> bool {
    Direct { dag, g }.formula(node, u)
}

struct Direct<'a> {
    dag: &'a FormulaDag,
    g: &'a LabeledGraph,
}

impl Direct<'_> {
    fn formula(&mut self, node: NodeId, u: usize) -> bool {
        match self.dag.formula(node) {
            FormulaNode::Prop(p) => self.g.has_label(u, self.dag.prop_name(*p)),
            FormulaNode::Not(a) => !self.formula(*a, u),
            FormulaNode::Or(a, b) => self.formula(*a, u) || self.formula(*b, u),
            FormulaNode::GeqZero(e) => !self.expr(e, u).is_negative(),
        }
    }

    fn expr(&mut self, e: &ExprId, u: usize) -> Int {
        match self.dag.expr(e) {
            ExprNode::Const(c) => c.clone(),
            ExprNode::One(f) => Int::from(self.formula(*f, u) as u8),
            ExprNode::Count(f) => {
                let mut k = 0u64;
                for &v in self.g.successors(u) {
                    if self.formula(*f, v) {
                        k += 1;
                    }
                }
                Int::from(k)
            }
            ExprNode::Add(a, b) => self.expr(a, u) + self.expr(b, u),
            ExprNode::Scale(c, a) => c * self.expr(a, u),
        }
    }
}
