//! Syntax of K#: a node arena where formula nodes may be shared and
//! arithmetic expression nodes have exactly one parent.
//!
//! Formula nodes are addressed by [`NodeId`] (cheap to copy, so sharing is
//! free). Expression nodes are addressed by [`ExprId`], which is deliberately
//! neither `Copy` nor `Clone`: constructing a parent consumes the child handle,
//! so an expression can never be attached twice.
//!
//! Propositions are interned per name: asking for `p` twice yields the same
//! node. Every other constructor allocates a fresh node, so sharing of
//! compound formulas is always explicit.

mod atom;
mod parse;
mod print;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::Int;

pub use atom::{normalize_atom, EmlConstraint, LinearAtom};
pub use parse::{parse, ParseError, ParseErrorKind};
pub use print::print;

/// Handle to a formula node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Handle to an expression node. Owning the handle is the right to attach it.
#[derive(Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExprId(pub(crate) u32);

impl ExprId {
    pub fn index(&self) -> usize {
        self.0 as usize
    }

    pub(crate) fn dup(&self) -> ExprId {
        ExprId(self.0)
    }
}

/// Index into a dag's proposition table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PropId(pub(crate) u32);

impl PropId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub enum FormulaNode {
    Prop(PropId),
    Not(NodeId),
    Or(NodeId, NodeId),
    GeqZero(ExprId),
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub enum ExprNode {
    Const(Int),
    /// The indicator `1_φ`.
    One(NodeId),
    /// The successor count `#φ`.
    Count(NodeId),
    Add(ExprId, ExprId),
    Scale(Int, ExprId),
}

impl Clone for FormulaNode {
    fn clone(&self) -> Self {
        match self {
            FormulaNode::Prop(p) => FormulaNode::Prop(*p),
            FormulaNode::Not(a) => FormulaNode::Not(*a),
            FormulaNode::Or(a, b) => FormulaNode::Or(*a, *b),
            FormulaNode::GeqZero(e) => FormulaNode::GeqZero(e.dup()),
        }
    }
}

impl Clone for ExprNode {
    fn clone(&self) -> Self {
        match self {
            ExprNode::Const(c) => ExprNode::Const(c.clone()),
            ExprNode::One(f) => ExprNode::One(*f),
            ExprNode::Count(f) => ExprNode::Count(*f),
            ExprNode::Add(a, b) => ExprNode::Add(a.dup(), b.dup()),
            ExprNode::Scale(c, e) => ExprNode::Scale(c.clone(), e.dup()),
        }
    }
}

/// A node of either sort, in creation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Formula(NodeId),
    Expr(u32),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DagError {
    #[error("node {0} refers to a child that does not precede it")]
    ForwardReference(usize),
    #[error("expression node {0} has in-degree {1}, expected 1")]
    SharedExpression(usize, usize),
    #[error("dag has no root")]
    NoRoot,
}

/// A K# formula represented as a DAG.
#[derive(Clone, Debug, Default)]
pub struct FormulaDag {
    formulas: Vec<FormulaNode>,
    exprs: Vec<ExprNode>,
    seq: Vec<Slot>,
    props: Vec<String>,
    prop_index: HashMap<String, PropId>,
    prop_nodes: HashMap<PropId, NodeId>,
    root: Option<NodeId>,
}

impl FormulaDag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn root(&self) -> NodeId {
        self.root.expect("formula dag has no root")
    }

    pub fn try_root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn set_root(&mut self, root: NodeId) {
        assert!(root.index() < self.formulas.len(), "root out of range");
        self.root = Some(root);
    }

    pub fn formula(&self, id: NodeId) -> &FormulaNode {
        &self.formulas[id.index()]
    }

    pub fn expr(&self, id: &ExprId) -> &ExprNode {
        &self.exprs[id.index()]
    }

    pub(crate) fn expr_at(&self, index: usize) -> &ExprNode {
        &self.exprs[index]
    }

    pub fn num_formula_nodes(&self) -> usize {
        self.formulas.len()
    }

    pub fn num_expr_nodes(&self) -> usize {
        self.exprs.len()
    }

    /// All nodes in creation order; children always precede parents.
    pub fn creation_order(&self) -> &[Slot] {
        &self.seq
    }

    pub fn propositions(&self) -> &[String] {
        &self.props
    }

    pub fn prop_name(&self, p: PropId) -> &str {
        &self.props[p.index()]
    }

    pub fn lookup_prop(&self, name: &str) -> Option<PropId> {
        self.prop_index.get(name).copied()
    }

    /// Name of the proposition if `id` is a proposition node.
    pub fn as_prop(&self, id: NodeId) -> Option<&str> {
        match self.formula(id) {
            FormulaNode::Prop(p) => Some(self.prop_name(*p)),
            _ => None,
        }
    }

    fn push_formula(&mut self, node: FormulaNode) -> NodeId {
        let id = NodeId(self.formulas.len() as u32);
        self.formulas.push(node);
        self.seq.push(Slot::Formula(id));
        id
    }

    fn push_expr(&mut self, node: ExprNode) -> ExprId {
        let id = self.exprs.len() as u32;
        self.exprs.push(node);
        self.seq.push(Slot::Expr(id));
        ExprId(id)
    }

    fn check_node(&self, id: NodeId) {
        assert!(id.index() < self.formulas.len(), "unknown formula node {id:?}");
    }

    // ---- primitive constructors -------------------------------------------------

    /// The (interned) proposition node for `name`.
    pub fn prop(&mut self, name: &str) -> NodeId {
        let pid = match self.prop_index.get(name) {
            Some(p) => *p,
            None => {
                let p = PropId(self.props.len() as u32);
                self.props.push(name.to_string());
                self.prop_index.insert(name.to_string(), p);
                p
            }
        };
        if let Some(n) = self.prop_nodes.get(&pid) {
            return *n;
        }
        let n = self.push_formula(FormulaNode::Prop(pid));
        self.prop_nodes.insert(pid, n);
        n
    }

    pub fn not(&mut self, f: NodeId) -> NodeId {
        self.check_node(f);
        self.push_formula(FormulaNode::Not(f))
    }

    pub fn or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.check_node(a);
        self.check_node(b);
        self.push_formula(FormulaNode::Or(a, b))
    }

    pub fn geq_zero(&mut self, e: ExprId) -> NodeId {
        self.push_formula(FormulaNode::GeqZero(e))
    }

    pub fn constant(&mut self, c: impl Into<Int>) -> ExprId {
        self.push_expr(ExprNode::Const(c.into()))
    }

    pub fn one(&mut self, f: NodeId) -> ExprId {
        self.check_node(f);
        self.push_expr(ExprNode::One(f))
    }

    pub fn count(&mut self, f: NodeId) -> ExprId {
        self.check_node(f);
        self.push_expr(ExprNode::Count(f))
    }

    pub fn add(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.push_expr(ExprNode::Add(a, b))
    }

    pub fn scale(&mut self, c: impl Into<Int>, e: ExprId) -> ExprId {
        self.push_expr(ExprNode::Scale(c.into(), e))
    }

    // ---- derived connectives ----------------------------------------------------

    /// `0 >= 0`.
    pub fn top(&mut self) -> NodeId {
        let z = self.constant(0);
        self.geq_zero(z)
    }

    pub fn bottom(&mut self) -> NodeId {
        let t = self.top();
        self.not(t)
    }

    /// `a ∧ b` as `¬(¬a ∨ ¬b)`.
    pub fn and(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let na = self.not(a);
        let nb = self.not(b);
        let o = self.or(na, nb);
        self.not(o)
    }

    /// Left-folded conjunction; `None` for an empty list.
    pub fn and_all(&mut self, items: &[NodeId]) -> Option<NodeId> {
        let (first, rest) = items.split_first()?;
        Some(rest.iter().fold(*first, |acc, x| self.and(acc, *x)))
    }

    pub fn or_all(&mut self, items: &[NodeId]) -> Option<NodeId> {
        let (first, rest) = items.split_first()?;
        Some(rest.iter().fold(*first, |acc, x| self.or(acc, *x)))
    }

    pub fn implies(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let na = self.not(a);
        self.or(na, b)
    }

    /// `(¬a ∨ b) ∧ (¬b ∨ a)`; `a` and `b` are shared.
    pub fn iff(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let l = self.implies(a, b);
        let r = self.implies(b, a);
        self.and(l, r)
    }

    /// `lhs >= rhs` as `lhs + -1 * rhs >= 0`.
    pub fn ge(&mut self, lhs: ExprId, rhs: ExprId) -> NodeId {
        let neg = self.scale(-1, rhs);
        let sum = self.add(lhs, neg);
        self.geq_zero(sum)
    }

    /// `lhs <= rhs` as `rhs + -1 * lhs >= 0`.
    pub fn le(&mut self, lhs: ExprId, rhs: ExprId) -> NodeId {
        self.ge(rhs, lhs)
    }

    /// `□φ := #¬φ <= 0`, built as `-1 * #¬φ >= 0`.
    pub fn box_(&mut self, f: NodeId) -> NodeId {
        let nf = self.not(f);
        let c = self.count(nf);
        let s = self.scale(-1, c);
        self.geq_zero(s)
    }

    /// `□^{≤m} φ := ⋀_{0≤i≤m} □^i φ`, with each `□^i φ` shared with `□^{i+1} φ`.
    pub fn box_upto(&mut self, m: usize, f: NodeId) -> NodeId {
        let mut layers = vec![f];
        for _ in 0..m {
            let last = *layers.last().unwrap();
            let b = self.box_(last);
            layers.push(b);
        }
        self.and_all(&layers).unwrap()
    }

    /// Graded diamond `◇^{≥k} φ`, i.e. `k <= #φ`.
    pub fn diamond_geq(&mut self, k: impl Into<Int>, f: NodeId) -> NodeId {
        let kk = self.constant(k);
        let c = self.count(f);
        self.le(kk, c)
    }

    // ---- metrics ------------------------------------------------------------------

    /// Modal depth of every formula and expression node, indexed by node.
    pub fn modal_depths(&self) -> (Vec<usize>, Vec<usize>) {
        let mut fd = vec![0usize; self.formulas.len()];
        let mut ed = vec![0usize; self.exprs.len()];
        for slot in &self.seq {
            match *slot {
                Slot::Formula(id) => {
                    fd[id.index()] = match self.formula(id) {
                        FormulaNode::Prop(_) => 0,
                        FormulaNode::Not(a) => fd[a.index()],
                        FormulaNode::Or(a, b) => fd[a.index()].max(fd[b.index()]),
                        FormulaNode::GeqZero(e) => ed[e.index()],
                    }
                }
                Slot::Expr(i) => {
                    ed[i as usize] = match &self.exprs[i as usize] {
                        ExprNode::Const(_) => 0,
                        ExprNode::One(f) => fd[f.index()],
                        ExprNode::Count(f) => fd[f.index()] + 1,
                        ExprNode::Add(a, b) => ed[a.index()].max(ed[b.index()]),
                        ExprNode::Scale(_, e) => ed[e.index()],
                    }
                }
            }
        }
        (fd, ed)
    }

    pub fn modal_depth(&self, node: NodeId) -> usize {
        self.modal_depths().0[node.index()]
    }

    pub fn expr_modal_depth(&self, e: &ExprId) -> usize {
        self.modal_depths().1[e.index()]
    }

    /// Formula and expression nodes reachable from `node` (inclusive).
    pub fn reachable(&self, node: NodeId) -> (Vec<bool>, Vec<bool>) {
        let mut fseen = vec![false; self.formulas.len()];
        let mut eseen = vec![false; self.exprs.len()];
        let mut stack = vec![Slot::Formula(node)];
        while let Some(s) = stack.pop() {
            match s {
                Slot::Formula(id) => {
                    if std::mem::replace(&mut fseen[id.index()], true) {
                        continue;
                    }
                    match self.formula(id) {
                        FormulaNode::Prop(_) => {}
                        FormulaNode::Not(a) => stack.push(Slot::Formula(*a)),
                        FormulaNode::Or(a, b) => {
                            stack.push(Slot::Formula(*a));
                            stack.push(Slot::Formula(*b));
                        }
                        FormulaNode::GeqZero(e) => stack.push(Slot::Expr(e.0)),
                    }
                }
                Slot::Expr(i) => {
                    if std::mem::replace(&mut eseen[i as usize], true) {
                        continue;
                    }
                    match &self.exprs[i as usize] {
                        ExprNode::Const(_) => {}
                        ExprNode::One(f) | ExprNode::Count(f) => stack.push(Slot::Formula(*f)),
                        ExprNode::Add(a, b) => {
                            stack.push(Slot::Expr(a.0));
                            stack.push(Slot::Expr(b.0));
                        }
                        ExprNode::Scale(_, e) => stack.push(Slot::Expr(e.0)),
                    }
                }
            }
        }
        (fseen, eseen)
    }

    /// `sub(φ)` as an enumeration: propositions first, then the remaining
    /// subformulas in creation order (a topological order, children first).
    pub fn subformulas(&self, node: NodeId) -> Vec<NodeId> {
        let (fseen, _) = self.reachable(node);
        let mut props = Vec::new();
        let mut rest = Vec::new();
        for (i, seen) in fseen.iter().enumerate() {
            if !*seen {
                continue;
            }
            let id = NodeId(i as u32);
            if matches!(self.formula(id), FormulaNode::Prop(_)) {
                props.push(id);
            } else {
                rest.push(id);
            }
        }
        props.extend(rest);
        props
    }

    /// Number of nodes of both sorts reachable from the root.
    pub fn size(&self) -> usize {
        self.size_of(self.root())
    }

    pub fn size_of(&self, node: NodeId) -> usize {
        let (f, e) = self.reachable(node);
        f.iter().filter(|x| **x).count() + e.iter().filter(|x| **x).count()
    }

    /// Size of the syntax tree obtained by unfolding all sharing (saturating).
    pub fn tree_size(&self, node: NodeId) -> u128 {
        let mut fs = vec![0u128; self.formulas.len()];
        let mut es = vec![0u128; self.exprs.len()];
        for slot in &self.seq {
            match *slot {
                Slot::Formula(id) => {
                    fs[id.index()] = 1u128.saturating_add(match self.formula(id) {
                        FormulaNode::Prop(_) => 0,
                        FormulaNode::Not(a) => fs[a.index()],
                        FormulaNode::Or(a, b) => fs[a.index()].saturating_add(fs[b.index()]),
                        FormulaNode::GeqZero(e) => es[e.index()],
                    })
                }
                Slot::Expr(i) => {
                    es[i as usize] = 1u128.saturating_add(match &self.exprs[i as usize] {
                        ExprNode::Const(_) => 0,
                        ExprNode::One(f) | ExprNode::Count(f) => fs[f.index()],
                        ExprNode::Add(a, b) => es[a.index()].saturating_add(es[b.index()]),
                        ExprNode::Scale(_, e) => es[e.index()],
                    })
                }
            }
        }
        fs[node.index()]
    }

    /// In-degree of every formula node counted over the part reachable from `node`.
    pub fn formula_in_degrees(&self, node: NodeId) -> Vec<usize> {
        let (fseen, eseen) = self.reachable(node);
        let mut deg = vec![0usize; self.formulas.len()];
        for (i, f) in self.formulas.iter().enumerate() {
            if !fseen[i] {
                continue;
            }
            match f {
                FormulaNode::Not(a) => deg[a.index()] += 1,
                FormulaNode::Or(a, b) => {
                    deg[a.index()] += 1;
                    deg[b.index()] += 1;
                }
                _ => {}
            }
        }
        for (i, e) in self.exprs.iter().enumerate() {
            if !eseen[i] {
                continue;
            }
            if let ExprNode::One(f) | ExprNode::Count(f) = e {
                deg[f.index()] += 1;
            }
        }
        deg
    }

    /// True when no non-proposition formula node reachable from the root has
    /// more than one parent. Propositions are leaves and always interned.
    pub fn is_tree(&self) -> bool {
        let root = self.root();
        let deg = self.formula_in_degrees(root);
        deg.iter().enumerate().all(|(i, d)| {
            *d <= 1 || matches!(self.formulas[i], FormulaNode::Prop(_))
        })
    }

    /// True when no `1_φ` is reachable from `node`.
    pub fn is_one_free(&self, node: NodeId) -> bool {
        let (_, eseen) = self.reachable(node);
        self.exprs
            .iter()
            .enumerate()
            .all(|(i, e)| !eseen[i] || !matches!(e, ExprNode::One(_)))
    }

    /// Structural audit: children precede parents (hence acyclic) and every
    /// expression node has at most one parent, exactly one if reachable.
    pub fn audit(&self) -> Result<(), DagError> {
        let root = self.root.ok_or(DagError::NoRoot)?;
        let mut edeg = vec![0usize; self.exprs.len()];
        for (i, f) in self.formulas.iter().enumerate() {
            match f {
                FormulaNode::Prop(_) => {}
                FormulaNode::Not(a) => {
                    if a.index() >= i {
                        return Err(DagError::ForwardReference(i));
                    }
                }
                FormulaNode::Or(a, b) => {
                    if a.index() >= i || b.index() >= i {
                        return Err(DagError::ForwardReference(i));
                    }
                }
                FormulaNode::GeqZero(e) => edeg[e.index()] += 1,
            }
        }
        for (i, e) in self.exprs.iter().enumerate() {
            match e {
                ExprNode::Add(a, b) => {
                    if a.index() >= i || b.index() >= i {
                        return Err(DagError::ForwardReference(i));
                    }
                    edeg[a.index()] += 1;
                    edeg[b.index()] += 1;
                }
                ExprNode::Scale(_, a) => {
                    if a.index() >= i {
                        return Err(DagError::ForwardReference(i));
                    }
                    edeg[a.index()] += 1;
                }
                _ => {}
            }
        }
        let (_, eseen) = self.reachable(root);
        for (i, d) in edeg.iter().enumerate() {
            if *d > 1 || (eseen[i] && *d != 1) {
                return Err(DagError::SharedExpression(i, *d));
            }
        }
        Ok(())
    }
}

/// Copies nodes from one dag into another.
///
/// With `share == true` the copy keeps the source's sharing (each source
/// node is copied once). With `share == false` every occurrence is copied
/// separately, producing a tree.
pub struct Importer<'a> {
    src: &'a FormulaDag,
    share: bool,
    memo: HashMap<NodeId, NodeId>,
}

impl<'a> Importer<'a> {
    pub fn new(src: &'a FormulaDag, share: bool) -> Self {
        Importer { src, share, memo: HashMap::new() }
    }

    pub fn formula(&mut self, dst: &mut FormulaDag, node: NodeId) -> NodeId {
        self.formula_with(dst, node, &mut |_, _| None)
    }

    /// Like [`Importer::formula`], but `hook` may replace any source formula
    /// node before it is copied.
    pub fn formula_with(
        &mut self,
        dst: &mut FormulaDag,
        node: NodeId,
        hook: &mut dyn FnMut(&mut FormulaDag, NodeId) -> Option<NodeId>,
    ) -> NodeId {
        if self.share {
            if let Some(n) = self.memo.get(&node) {
                return *n;
            }
        }
        let out = if let Some(r) = hook(dst, node) {
            r
        } else {
            match self.src.formula(node) {
                FormulaNode::Prop(p) => dst.prop(self.src.prop_name(*p)),
                FormulaNode::Not(a) => {
                    let a = self.formula_with(dst, *a, hook);
                    dst.not(a)
                }
                FormulaNode::Or(a, b) => {
                    let a = self.formula_with(dst, *a, hook);
                    let b = self.formula_with(dst, *b, hook);
                    dst.or(a, b)
                }
                FormulaNode::GeqZero(e) => {
                    let e = self.expr_with(dst, e, hook);
                    dst.geq_zero(e)
                }
            }
        };
        if self.share {
            self.memo.insert(node, out);
        }
        out
    }

    pub fn expr(&mut self, dst: &mut FormulaDag, e: &ExprId) -> ExprId {
        self.expr_with(dst, e, &mut |_, _| None)
    }

    pub fn expr_with(
        &mut self,
        dst: &mut FormulaDag,
        e: &ExprId,
        hook: &mut dyn FnMut(&mut FormulaDag, NodeId) -> Option<NodeId>,
    ) -> ExprId {
        match self.src.expr(e) {
            ExprNode::Const(c) => dst.constant(c.clone()),
            ExprNode::One(f) => {
                let f = self.formula_with(dst, *f, hook);
                dst.one(f)
            }
            ExprNode::Count(f) => {
                let f = self.formula_with(dst, *f, hook);
                dst.count(f)
            }
            ExprNode::Add(a, b) => {
                let a = self.expr_with(dst, a, hook);
                let b = self.expr_with(dst, b, hook);
                dst.add(a, b)
            }
            ExprNode::Scale(c, a) => {
                let a = self.expr_with(dst, a, hook);
                dst.scale(c.clone(), a)
            }
        }
    }
}

/// Structural isomorphism of the root-reachable parts of two dags, including
/// the sharing pattern of formula nodes. Propositions are matched by name
/// unless `rename` is set, in which case any consistent bijection is accepted.
pub fn is_isomorphic(a: &FormulaDag, b: &FormulaDag, rename: bool) -> bool {
    let mut fmap: HashMap<NodeId, NodeId> = HashMap::new();
    let mut back: HashMap<NodeId, NodeId> = HashMap::new();
    let mut pmap: HashMap<PropId, PropId> = HashMap::new();
    let mut pback: HashMap<PropId, PropId> = HashMap::new();
    let mut stack: Vec<(Slot, Slot)> = vec![(Slot::Formula(a.root()), Slot::Formula(b.root()))];
    while let Some(pair) = stack.pop() {
        match pair {
            (Slot::Formula(x), Slot::Formula(y)) => {
                match (fmap.get(&x), back.get(&y)) {
                    (Some(m), Some(n)) => {
                        if *m != y || *n != x {
                            return false;
                        }
                        continue;
                    }
                    (None, None) => {
                        fmap.insert(x, y);
                        back.insert(y, x);
                    }
                    _ => return false,
                }
                match (a.formula(x), b.formula(y)) {
                    (FormulaNode::Prop(p), FormulaNode::Prop(q)) => {
                        if rename {
                            match (pmap.get(p), pback.get(q)) {
                                (Some(m), Some(n)) if m == q && n == p => {}
                                (None, None) => {
                                    pmap.insert(*p, *q);
                                    pback.insert(*q, *p);
                                }
                                _ => return false,
                            }
                        } else if a.prop_name(*p) != b.prop_name(*q) {
                            return false;
                        }
                    }
                    (FormulaNode::Not(x1), FormulaNode::Not(y1)) => {
                        stack.push((Slot::Formula(*x1), Slot::Formula(*y1)))
                    }
                    (FormulaNode::Or(x1, x2), FormulaNode::Or(y1, y2)) => {
                        stack.push((Slot::Formula(*x1), Slot::Formula(*y1)));
                        stack.push((Slot::Formula(*x2), Slot::Formula(*y2)));
                    }
                    (FormulaNode::GeqZero(e), FormulaNode::GeqZero(f)) => {
                        stack.push((Slot::Expr(e.0), Slot::Expr(f.0)))
                    }
                    _ => return false,
                }
            }
            (Slot::Expr(x), Slot::Expr(y)) => match (a.expr_at(x as usize), b.expr_at(y as usize)) {
                (ExprNode::Const(c), ExprNode::Const(d)) => {
                    if c != d {
                        return false;
                    }
                }
                (ExprNode::One(f), ExprNode::One(g)) | (ExprNode::Count(f), ExprNode::Count(g)) => {
                    stack.push((Slot::Formula(*f), Slot::Formula(*g)))
                }
                (ExprNode::Add(x1, x2), ExprNode::Add(y1, y2)) => {
                    stack.push((Slot::Expr(x1.0), Slot::Expr(y1.0)));
                    stack.push((Slot::Expr(x2.0), Slot::Expr(y2.0)));
                }
                (ExprNode::Scale(c, x1), ExprNode::Scale(d, y1)) => {
                    if c != d {
                        return false;
                    }
                    stack.push((Slot::Expr(x1.0), Slot::Expr(y1.0)));
                }
                _ => return false,
            },
            _ => return false,
        }
    }
    true
}

/// A canonical string for the syntax tree below `node` (sharing unfolded).
/// Two nodes have equal keys iff their unfolded trees are equal.
pub fn structural_key(dag: &FormulaDag, node: NodeId) -> String {
    let mut out = String::new();
    key_formula(dag, node, &mut out);
    out
}

fn key_formula(dag: &FormulaDag, node: NodeId, out: &mut String) {
    match dag.formula(node) {
        FormulaNode::Prop(p) => {
            out.push('P');
            out.push_str(dag.prop_name(*p));
            out.push(' ');
        }
        FormulaNode::Not(a) => {
            out.push('N');
            key_formula(dag, *a, out);
        }
        FormulaNode::Or(a, b) => {
            out.push('O');
            key_formula(dag, *a, out);
            key_formula(dag, *b, out);
        }
        FormulaNode::GeqZero(e) => {
            out.push('G');
            key_expr(dag, e, out);
        }
    }
}

fn key_expr(dag: &FormulaDag, e: &ExprId, out: &mut String) {
    match dag.expr(e) {
        ExprNode::Const(c) => {
            out.push('C');
            out.push_str(&c.to_string());
            out.push(' ');
        }
        ExprNode::One(f) => {
            out.push('I');
            key_formula(dag, *f, out);
        }
        ExprNode::Count(f) => {
            out.push('#');
            key_formula(dag, *f, out);
        }
        ExprNode::Add(a, b) => {
            out.push('+');
            key_expr(dag, a, out);
            key_expr(dag, b, out);
        }
        ExprNode::Scale(c, a) => {
            out.push('*');
            out.push_str(&c.to_string());
            out.push(' ');
            key_expr(dag, a, out);
        }
    }
}

impl fmt::Display for FormulaDag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn few_tubas() -> FormulaDag {
        parse("(#musician >= 1) & (#true >= 3 * #tubaplayer)").unwrap()
    }

    #[test]
    fn modal_depth_of_nested_counts() {
        let d = parse("[p & (#q <= 4)] <= #(#p >= 2)").unwrap();
        assert_eq!(d.modal_depth(d.root()), 2);
        let p = parse("p").unwrap();
        assert_eq!(p.modal_depth(p.root()), 0);
        let t = few_tubas();
        assert_eq!(t.modal_depth(t.root()), 1);
    }

    #[test]
    fn subformulas_of_negated_disjunction() {
        let d = parse("!(p | (8 <= 3 * #q))").unwrap();
        let subs = d.subformulas(d.root());
        assert_eq!(subs.len(), 5);
        assert_eq!(d.as_prop(subs[0]), Some("p"));
        assert_eq!(d.as_prop(subs[1]), Some("q"));
        assert!(matches!(d.formula(subs[2]), FormulaNode::GeqZero(_)));
        assert!(matches!(d.formula(subs[3]), FormulaNode::Or(..)));
        assert_eq!(subs[4], d.root());
        let single = parse("p").unwrap();
        assert_eq!(single.subformulas(single.root()), vec![single.root()]);
    }

    #[test]
    fn subformulas_respect_containment_order() {
        let t = few_tubas();
        let subs = t.subformulas(t.root());
        let names: Vec<_> = subs.iter().filter_map(|n| t.as_prop(*n)).collect();
        assert_eq!(names, vec!["musician", "tubaplayer"]);
        let pos: HashMap<NodeId, usize> = subs.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        for n in &subs {
            for s in t.subformulas(*n) {
                assert!(pos[&s] <= pos[n]);
            }
        }
        // musician, tubaplayer, true, two atoms, and the four-node conjunction encoding
        assert_eq!(subs.len(), 9);
    }

    #[test]
    fn box_upto_zero_is_identity_and_depth_grows() {
        let mut d = FormulaDag::new();
        let p = d.prop("p");
        assert_eq!(d.box_upto(0, p), p);
        for m in 0..6 {
            let b = d.box_upto(m, p);
            assert_eq!(d.modal_depth(b), m);
        }
    }

    #[test]
    fn audit_accepts_parsed_and_built_dags() {
        let t = few_tubas();
        t.audit().unwrap();
        let mut d = FormulaDag::new();
        let p = d.prop("p");
        let b = d.box_upto(3, p);
        d.set_root(b);
        d.audit().unwrap();
    }

    #[test]
    fn prop_nodes_are_interned() {
        let mut d = FormulaDag::new();
        let a = d.prop("p");
        let b = d.prop("p");
        assert_eq!(a, b);
        let c = d.prop("q");
        assert_ne!(a, c);
    }

    #[test]
    fn isomorphism_sees_sharing() {
        let shared = parse("def a := p & q; a | a").unwrap();
        let unshared = parse("(p & q) | (p & q)").unwrap();
        assert!(!is_isomorphic(&shared, &unshared, false));
        assert!(is_isomorphic(&shared, &shared.clone(), false));
        assert_eq!(
            structural_key(&shared, shared.root()),
            structural_key(&unshared, unshared.root())
        );
    }

    #[test]
    fn tree_size_unfolds_sharing() {
        let shared = parse("def a := p & q; a | a").unwrap();
        let unshared = parse("(p & q) | (p & q)").unwrap();
        assert_eq!(shared.tree_size(shared.root()), unshared.tree_size(unshared.root()));
        assert!(shared.size() < unshared.size());
        assert!(!shared.is_tree());
        assert!(unshared.is_tree());
    }
}
