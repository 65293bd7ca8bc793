//! Linear normal form of atoms `ξ >= 0`.

use std::collections::HashMap;

use num_traits::{Signed, Zero};

use super::{ExprId, ExprNode, FormulaDag, NodeId};
use crate::Int;

/// `Σ k_j · 1_{φ_j} + Σ k'_j · #φ'_j + constant >= 0`.
///
/// Coefficients are merged per node and zero coefficients are dropped.
/// Terms keep the order of their first occurrence in the expression.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LinearAtom {
    pub ones: Vec<(NodeId, Int)>,
    pub counts: Vec<(NodeId, Int)>,
    pub constant: Int,
}

impl LinearAtom {
    pub fn is_ground(&self) -> bool {
        self.ones.is_empty() && self.counts.is_empty()
    }

    /// Evaluates the atom given values for its indicator and count terms.
    pub fn holds_with(&self, one: impl Fn(NodeId) -> bool, count: impl Fn(NodeId) -> u64) -> bool {
        let mut s = self.constant.clone();
        for (f, k) in &self.ones {
            if one(*f) {
                s += k;
            }
        }
        for (f, k) in &self.counts {
            let n = count(*f);
            if n != 0 {
                s += k * Int::from(n);
            }
        }
        !s.is_negative()
    }
}

/// Flattens the expression `e` into linear form.
pub fn normalize_atom(dag: &FormulaDag, e: &ExprId) -> LinearAtom {
    let mut ones: Vec<(NodeId, Int)> = Vec::new();
    let mut counts: Vec<(NodeId, Int)> = Vec::new();
    let mut one_pos: HashMap<NodeId, usize> = HashMap::new();
    let mut count_pos: HashMap<NodeId, usize> = HashMap::new();
    let mut constant = Int::zero();
    let mut stack: Vec<(usize, Int)> = vec![(e.index(), Int::from(1))];
    // Add pushes the right operand first so terms come out left to right.
    while let Some((i, mult)) = stack.pop() {
        if mult.is_zero() {
            continue;
        }
        match dag.expr_at(i) {
            ExprNode::Const(c) => constant += c * &mult,
            ExprNode::One(f) => accumulate(&mut ones, &mut one_pos, *f, mult),
            ExprNode::Count(f) => accumulate(&mut counts, &mut count_pos, *f, mult),
            ExprNode::Add(a, b) => {
                stack.push((b.index(), mult.clone()));
                stack.push((a.index(), mult));
            }
            ExprNode::Scale(c, a) => stack.push((a.index(), c * mult)),
        }
    }
    ones.retain(|(_, k)| !k.is_zero());
    counts.retain(|(_, k)| !k.is_zero());
    LinearAtom { ones, counts, constant }
}

fn accumulate(v: &mut Vec<(NodeId, Int)>, pos: &mut HashMap<NodeId, usize>, f: NodeId, k: Int) {
    match pos.get(&f) {
        Some(i) => v[*i].1 += k,
        None => {
            pos.insert(f, v.len());
            v.push((f, k));
        }
    }
}

/// An indicator-free atom written with a non-negative bound and a strict
/// comparison: `Σ k_j #φ_j > bound`, possibly negated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmlConstraint {
    pub negated: bool,
    pub counts: Vec<(NodeId, Int)>,
    pub bound: Int,
}

impl EmlConstraint {
    /// Rewrites `Σ c_j #φ_j + c >= 0`.
    ///
    /// For `c >= 0` this is `¬(Σ -c_j #φ_j > c)`. For `c < 0` the atom says
    /// `Σ c_j #φ_j >= -c`, i.e. `Σ c_j #φ_j > -c - 1`, whose bound is again
    /// non-negative.
    pub fn from_atom(atom: &LinearAtom) -> Option<EmlConstraint> {
        if !atom.ones.is_empty() {
            return None;
        }
        if !atom.constant.is_negative() {
            Some(EmlConstraint {
                negated: true,
                counts: atom.counts.iter().map(|(f, k)| (*f, -k)).collect(),
                bound: atom.constant.clone(),
            })
        } else {
            Some(EmlConstraint {
                negated: false,
                counts: atom.counts.clone(),
                bound: -&atom.constant - 1,
            })
        }
    }

    pub fn holds_with(&self, count: impl Fn(NodeId) -> u64) -> bool {
        let mut s = Int::zero();
        for (f, k) in &self.counts {
            s += k * Int::from(count(*f));
        }
        (s > self.bound) != self.negated
    }
}
