//! Printing formulas back to the text syntax.
//!
//! Shared compound nodes are emitted as `def` lines, so parsing the output
//! rebuilds a dag with the same shape.

use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use num_traits::Zero;

use super::{ExprId, ExprNode, FormulaDag, FormulaNode, NodeId};

const OR: u8 = 1;
const AND: u8 = 2;
const ITEM: u8 = 3;
const UNARY: u8 = 4;

struct Printer<'a> {
    dag: &'a FormulaDag,
    deg: Vec<usize>,
    names: HashMap<NodeId, String>,
}

/// Renders the dag rooted at its root.
pub fn print(dag: &FormulaDag) -> String {
    let root = dag.root();
    let deg = dag.formula_in_degrees(root);
    let mut taken: HashSet<&str> = dag.propositions().iter().map(|s| s.as_str()).collect();
    taken.insert("def");
    taken.insert("true");
    taken.insert("false");
    let (fseen, _) = dag.reachable(root);
    let mut names = HashMap::new();
    let mut order = Vec::new();
    let mut k = 0usize;
    for i in 0..dag.num_formula_nodes() {
        let id = NodeId(i as u32);
        if !fseen[i] || deg[i] < 2 || matches!(dag.formula(id), FormulaNode::Prop(_)) {
            continue;
        }
        let name = loop {
            let n = format!("d{k}");
            k += 1;
            if !taken.contains(n.as_str()) {
                break n;
            }
        };
        names.insert(id, name);
        order.push(id);
    }
    let pr = Printer { dag, deg, names };
    let mut out = String::new();
    for id in order {
        let _ = write!(out, "def {} := ", pr.names[&id]);
        pr.body(id, 0, &mut out);
        out.push_str(";\n");
    }
    pr.formula(root, 0, &mut out);
    out
}

impl Printer<'_> {
    fn formula(&self, id: NodeId, ctx: u8, out: &mut String) {
        if let Some(n) = self.names.get(&id) {
            out.push_str(n);
            return;
        }
        self.body(id, ctx, out);
    }

    fn and_parts(&self, id: NodeId) -> Option<(NodeId, NodeId)> {
        let FormulaNode::Not(o) = self.dag.formula(id) else { return None };
        let FormulaNode::Or(na, nb) = self.dag.formula(*o) else { return None };
        let (FormulaNode::Not(a), FormulaNode::Not(b)) =
            (self.dag.formula(*na), self.dag.formula(*nb))
        else {
            return None;
        };
        let single = |n: NodeId| self.deg[n.index()] == 1;
        if single(*o) && single(*na) && single(*nb) {
            Some((*a, *b))
        } else {
            None
        }
    }

    fn is_top(&self, e: &ExprId) -> bool {
        matches!(self.dag.expr(e), ExprNode::Const(c) if c.is_zero())
    }

    fn body(&self, id: NodeId, ctx: u8, out: &mut String) {
        let dag = self.dag;
        let paren = match dag.formula(id) {
            FormulaNode::Prop(p) => {
                out.push_str(dag.prop_name(*p));
                return;
            }
            FormulaNode::GeqZero(e) if self.is_top(e) => {
                out.push_str("true");
                return;
            }
            FormulaNode::Not(_) if self.and_parts(id).is_some() => ctx > AND,
            FormulaNode::Not(_) => false,
            FormulaNode::Or(..) => ctx > OR,
            FormulaNode::GeqZero(_) => ctx > ITEM,
        };
        if paren {
            out.push('(');
        }
        match dag.formula(id) {
            FormulaNode::Not(a) => match self.and_parts(id) {
                Some((x, y)) => {
                    self.formula(x, AND, out);
                    out.push_str(" & ");
                    self.formula(y, ITEM, out);
                }
                None => {
                    out.push('!');
                    self.formula(*a, UNARY, out);
                }
            },
            FormulaNode::Or(a, b) => {
                self.formula(*a, OR, out);
                out.push_str(" | ");
                self.formula(*b, AND, out);
            }
            FormulaNode::GeqZero(e) => {
                self.expr(e, false, out);
                out.push_str(" >= 0");
            }
            FormulaNode::Prop(_) => unreachable!(),
        }
        if paren {
            out.push(')');
        }
    }

    fn expr(&self, e: &ExprId, term: bool, out: &mut String) {
        match self.dag.expr(e) {
            ExprNode::Const(c) => {
                let _ = write!(out, "{c}");
            }
            ExprNode::One(f) => {
                out.push('[');
                self.formula(*f, 0, out);
                out.push(']');
            }
            ExprNode::Count(f) => {
                out.push('#');
                self.formula(*f, UNARY, out);
            }
            ExprNode::Add(a, b) => {
                if term {
                    out.push('(');
                }
                self.expr(a, false, out);
                out.push_str(" + ");
                self.expr(b, true, out);
                if term {
                    out.push(')');
                }
            }
            ExprNode::Scale(c, a) => {
                let _ = write!(out, "{c} * ");
                self.expr(a, true, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::formula::{is_isomorphic, parse};

    fn round_trip(src: &str) {
        let d = parse(src).unwrap();
        let text = d.to_string();
        let back = parse(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert!(is_isomorphic(&d, &back, false), "{src} printed as {text}");
    }

    #[test]
    fn round_trips() {
        for src in [
            "p",
            "!(p | (8 <= 3 * #q))",
            "(#musician >= 1) & (#true >= 3 * #tubaplayer)",
            "def a := p & q; a | !a | [a] + #a >= 2",
            "p & q & r",
            "p & (q & r)",
            "p | (q | r)",
            "#(#p >= 1) <= 1 & p",
            "[] [] p -> <>3 q",
            "p <-> ([q] = #r)",
            "2 * (#p + #q) - -3 > [p | q]",
            "#!p >= 2",
            "!true",
        ] {
            round_trip(src);
        }
    }

    #[test]
    fn shared_nodes_get_definitions() {
        let d = parse("def a := #p >= 1; def b := a | q; b & !b & [a] >= 1").unwrap();
        let text = d.to_string();
        assert_eq!(text.matches("def ").count(), 2);
    }

    #[test]
    fn generated_names_avoid_propositions() {
        let d = parse("def a := d0 | d1; a & a").unwrap();
        let text = d.to_string();
        assert!(text.starts_with("def d2 := d0 | d1;"), "{text}");
    }
}
