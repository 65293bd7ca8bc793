use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use crate::formula::{normalize_atom, structural_key, FormulaDag, FormulaNode, NodeId};
use crate::Int;

/// Rewrites every atom as `Σ c_i #φ_i + c >= 0` with `c_i ≠ 0` and the
/// `φ_i` pairwise structurally distinct; equivalent at every pointed graph.
/// Ground atoms become `0 >= 0` or `-1 >= 0`. Indicator terms, if any, are
/// kept in the same way ahead of the counting terms.
pub fn eml_normal_atoms(dag: &FormulaDag) -> FormulaDag {
    let mut out = FormulaDag::new();
    let mut memo = HashMap::new();
    let r = normalize(dag, &mut out, dag.root(), &mut memo);
    out.set_root(r);
    out
}

fn normalize(src: &FormulaDag, dst: &mut FormulaDag, node: NodeId, memo: &mut HashMap<NodeId, NodeId>) -> NodeId {
    if let Some(n) = memo.get(&node) {
        return *n;
    }
    let out = match src.formula(node) {
        FormulaNode::Prop(p) => dst.prop(src.prop_name(*p)),
        FormulaNode::Not(a) => {
            let a = normalize(src, dst, *a, memo);
            dst.not(a)
        }
        FormulaNode::Or(a, b) => {
            let a = normalize(src, dst, *a, memo);
            let b = normalize(src, dst, *b, memo);
            dst.or(a, b)
        }
        FormulaNode::GeqZero(e) => {
            let atom = normalize_atom(src, e);
            let ones = merge(src, &atom.ones);
            let counts = merge(src, &atom.counts);
            if ones.is_empty() && counts.is_empty() {
                let c = if atom.constant.is_negative() { -1 } else { 0 };
                let c = dst.constant(c);
                dst.geq_zero(c)
            } else {
                let mut terms = Vec::new();
                for (f, k) in ones {
                    let f = normalize(src, dst, f, memo);
                    let t = dst.one(f);
                    terms.push(scaled(dst, k, t));
                }
                for (f, k) in counts {
                    let f = normalize(src, dst, f, memo);
                    let t = dst.count(f);
                    terms.push(scaled(dst, k, t));
                }
                if !atom.constant.is_zero() {
                    terms.push(dst.constant(atom.constant.clone()));
                }
                let mut it = terms.into_iter();
                let first = it.next().unwrap();
                let sum = it.fold(first, |acc, t| dst.add(acc, t));
                dst.geq_zero(sum)
            }
        }
    };
    memo.insert(node, out);
    out
}

fn scaled(dst: &mut FormulaDag, k: Int, t: crate::formula::ExprId) -> crate::formula::ExprId {
    if k.is_one() {
        t
    } else {
        dst.scale(k, t)
    }
}

/// Sums coefficients of structurally equal arguments, first occurrence
/// first, dropping zeros.
fn merge(src: &FormulaDag, terms: &[(NodeId, Int)]) -> Vec<(NodeId, Int)> {
    let mut out: Vec<(NodeId, Int)> = Vec::new();
    let mut pos: HashMap<String, usize> = HashMap::new();
    for (f, k) in terms {
        let key = structural_key(src, *f);
        match pos.get(&key) {
            Some(i) => out[*i].1 += k,
            None => {
                pos.insert(key, out.len());
                out.push((*f, k.clone()));
            }
        }
    }
    out.retain(|(_, k)| !k.is_zero());
    out
}
