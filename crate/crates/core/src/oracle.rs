//! Brute-force bounded model search, used as ground truth in tests.
//!
//! Formulas are compiled to operations on vertex bitmasks, so one candidate
//! graph is checked in a few hundred machine operations. Candidate graphs
//! have the point at vertex 0.

use std::collections::HashMap;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::formula::{normalize_atom, FormulaDag, FormulaNode, NodeId, Slot};
use crate::graph::{LabeledGraph, PointedGraph};
use crate::semantics::check;

/// Largest number of vertices the enumerator accepts.
pub const MAX_ORACLE_VERTICES: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBound {
    pub max_vertices: usize,
    pub propositions: Vec<String>,
    pub max_out_degree: Option<usize>,
    /// Give up after this many candidate graphs.
    pub max_candidates: Option<u64>,
}

impl SearchBound {
    pub fn new<S: AsRef<str>>(max_vertices: usize, propositions: &[S]) -> Self {
        assert!((1..=MAX_ORACLE_VERTICES).contains(&max_vertices), "max_vertices out of range");
        SearchBound {
            max_vertices,
            propositions: propositions.iter().map(|p| p.as_ref().to_string()).collect(),
            max_out_degree: None,
            max_candidates: None,
        }
    }

    /// Four vertices over the formula's own propositions.
    pub fn for_formula(dag: &FormulaDag) -> Self {
        SearchBound::new(4, dag.propositions())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("candidate limit of {0} graphs reached")]
    Limit(u64),
}

/// A formula compiled to bitmask operations over at most 32 vertices.
#[derive(Clone, Debug)]
pub struct Compiled {
    ops: Vec<Op>,
    root: usize,
    big: Option<FormulaDag>,
}

#[derive(Clone, Debug)]
enum Op {
    /// Index into the label masks, `None` for a proposition outside the bound.
    Prop(Option<usize>),
    Not(usize),
    Or(usize, usize),
    Atom { ones: Vec<(usize, i64)>, counts: Vec<(usize, i64)>, constant: i64 },
}

impl Compiled {
    /// Compiles the root of `dag` against the given proposition order.
    pub fn new<S: AsRef<str>>(dag: &FormulaDag, props: &[S]) -> Self {
        let root = dag.root();
        let (fseen, _) = dag.reachable(root);
        let mut slot: HashMap<NodeId, usize> = HashMap::new();
        let mut ops = Vec::new();
        let mut fits = true;
        for s in dag.creation_order() {
            let Slot::Formula(id) = *s else { continue };
            if !fseen[id.index()] {
                continue;
            }
            let op = match dag.formula(id) {
                FormulaNode::Prop(p) => {
                    let name = dag.prop_name(*p);
                    Op::Prop(props.iter().position(|q| q.as_ref() == name))
                }
                FormulaNode::Not(a) => Op::Not(slot[a]),
                FormulaNode::Or(a, b) => Op::Or(slot[a], slot[b]),
                FormulaNode::GeqZero(e) => {
                    let atom = normalize_atom(dag, e);
                    let mut small = |k: &crate::Int| {
                        let v = k.to_i64().filter(|v| v.abs() < 1 << 40);
                        fits &= v.is_some();
                        v.unwrap_or(0)
                    };
                    let ones = atom.ones.iter().map(|(f, k)| (slot[f], small(k))).collect();
                    let counts = atom.counts.iter().map(|(f, k)| (slot[f], small(k))).collect();
                    Op::Atom { ones, counts, constant: small(&atom.constant) }
                }
            };
            slot.insert(id, ops.len());
            ops.push(op);
        }
        let big = if fits { None } else { Some(dag.clone()) };
        Compiled { root: slot[&root], ops, big }
    }

    /// Vertices satisfying the formula, as a bitmask; `succ[v]` and
    /// `labels[p]` are bitmasks too.
    pub fn eval(&self, succ: &[u32], labels: &[u32], scratch: &mut Vec<u32>) -> u32 {
        let n = succ.len();
        let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        scratch.clear();
        for op in &self.ops {
            let m = match op {
                Op::Prop(Some(p)) => labels[*p],
                Op::Prop(None) => 0,
                Op::Not(a) => !scratch[*a] & all,
                Op::Or(a, b) => scratch[*a] | scratch[*b],
                Op::Atom { ones, counts, constant } => {
                    let mut out = 0u32;
                    for (v, sv) in succ.iter().enumerate() {
                        let mut s = *constant;
                        for (f, k) in ones {
                            if scratch[*f] >> v & 1 == 1 {
                                s += k;
                            }
                        }
                        for (f, k) in counts {
                            s += k * (scratch[*f] & sv).count_ones() as i64;
                        }
                        if s >= 0 {
                            out |= 1 << v;
                        }
                    }
                    out
                }
            };
            scratch.push(m);
        }
        scratch[self.root]
    }

    fn holds_at_zero(&self, succ: &[u32], labels: &[u32], props: &[String], scratch: &mut Vec<u32>) -> bool {
        match &self.big {
            None => self.eval(succ, labels, scratch) & 1 == 1,
            Some(dag) => check(&to_graph(succ, labels, props), 0, dag),
        }
    }
}

/// Builds the graph with vertices `v0..` from bitmasks.
pub fn to_graph(succ: &[u32], labels: &[u32], props: &[String]) -> LabeledGraph {
    let mut g = LabeledGraph::with_props(props);
    for v in 0..succ.len() {
        let ls: Vec<&str> = props.iter().enumerate().filter(|(p, _)| labels[*p] >> v & 1 == 1).map(|(_, s)| s.as_str()).collect();
        g.add_vertex(&format!("v{v}"), &ls);
    }
    for (u, s) in succ.iter().enumerate() {
        for v in 0..succ.len() {
            if s >> v & 1 == 1 {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Visits every labeled digraph on exactly `n` vertices over `num_props`
/// propositions, without any pruning: `2^(n²) · 2^(num_props·n)` calls.
/// Stops early when `visit` returns `false`.
pub fn for_each_raw(n: usize, num_props: usize, visit: &mut dyn FnMut(&[u32], &[u32]) -> bool) {
    assert!(n <= MAX_ORACLE_VERTICES);
    let mut succ = vec![0u32; n];
    let mut labels = vec![0u32; num_props];
    let edge_bits = n * n;
    let label_bits = n * num_props;
    for e in 0..1u64 << edge_bits {
        for (u, s) in succ.iter_mut().enumerate() {
            *s = ((e >> (u * n)) & ((1 << n) - 1)) as u32;
        }
        for l in 0..1u64 << label_bits {
            for (p, m) in labels.iter_mut().enumerate() {
                *m = ((l >> (p * n)) & ((1 << n) - 1)) as u32;
            }
            if !visit(&succ, &labels) {
                return;
            }
        }
    }
}

/// The first `(G, v0)` with `G ⊨ φ` within the bound, by increasing number
/// of vertices, or `None` if there is none.
///
/// Candidates on `n` vertices are skipped when some vertex is unreachable
/// from the point (a smaller candidate covers them) or when the labels of
/// vertices `1..n` are not in non-decreasing order (a relabeling covers them).
pub fn find_model(dag: &FormulaDag, bound: &SearchBound) -> Result<Option<PointedGraph>, OracleError> {
    let props = &bound.propositions;
    let compiled = Compiled::new(dag, props);
    let np = props.len();
    let mut scratch = Vec::new();
    let mut seen: u64 = 0;
    for n in 1..=bound.max_vertices {
        let lbits = np;
        let lcount = 1u64 << lbits;
        // Per-vertex label codes, vertices 1..n non-decreasing.
        let mut codes = vec![0u64; n];
        loop {
            let mut labels = vec![0u32; np];
            for (v, c) in codes.iter().enumerate() {
                for (p, m) in labels.iter_mut().enumerate() {
                    if c >> p & 1 == 1 {
                        *m |= 1 << v;
                    }
                }
            }
            let mut succ = vec![0u32; n];
            for e in 0..1u64 << (n * n) {
                for (u, s) in succ.iter_mut().enumerate() {
                    *s = ((e >> (u * n)) & ((1 << n) - 1)) as u32;
                }
                if let Some(d) = bound.max_out_degree {
                    if succ.iter().any(|s| s.count_ones() as usize > d) {
                        continue;
                    }
                }
                if !all_reachable(&succ) {
                    continue;
                }
                seen += 1;
                if let Some(limit) = bound.max_candidates {
                    if seen > limit {
                        return Err(OracleError::Limit(limit));
                    }
                }
                if compiled.holds_at_zero(&succ, &labels, props, &mut scratch) {
                    let graph = to_graph(&succ, &labels, props);
                    debug_assert!(check(&graph, 0, dag));
                    return Ok(Some(PointedGraph { graph, point: 0 }));
                }
            }
            if !next_codes(&mut codes, lcount) {
                break;
            }
        }
    }
    Ok(None)
}

/// Like [`find_model`] but over the raw enumeration of [`for_each_raw`],
/// trying every vertex as the point. Slow; for cross-checking.
pub fn find_model_raw(dag: &FormulaDag, max_vertices: usize, props: &[String]) -> Option<PointedGraph> {
    let compiled = Compiled::new(dag, props);
    let mut scratch = Vec::new();
    let mut found = None;
    for n in 1..=max_vertices {
        for_each_raw(n, props.len(), &mut |succ, labels| {
            let sat = match &compiled.big {
                None => compiled.eval(succ, labels, &mut scratch),
                Some(d) => {
                    let g = to_graph(succ, labels, props);
                    (0..n).filter(|v| check(&g, *v, d)).fold(0, |m, v| m | 1 << v)
                }
            };
            if sat != 0 {
                found = Some(PointedGraph { graph: to_graph(succ, labels, props), point: sat.trailing_zeros() as usize });
                return false;
            }
            true
        });
        if found.is_some() {
            break;
        }
    }
    found
}

fn all_reachable(succ: &[u32]) -> bool {
    let n = succ.len();
    let all = (1u32 << n) - 1;
    let mut seen = 1u32;
    let mut frontier = 1u32;
    while frontier != 0 {
        let mut next = 0u32;
        let mut f = frontier;
        while f != 0 {
            let v = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= succ[v];
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen & all == all
}

/// Advances the point's code freely and the others as a non-decreasing sequence.
fn next_codes(codes: &mut [u64], lcount: u64) -> bool {
    let n = codes.len();
    // Rightmost non-point position that can grow.
    for i in (1..n).rev() {
        if codes[i] + 1 < lcount {
            let v = codes[i] + 1;
            for c in codes[i..].iter_mut() {
                *c = v;
            }
            return true;
        }
    }
    if codes[0] + 1 < lcount {
        codes[0] += 1;
        for c in codes[1..].iter_mut() {
            *c = 0;
        }
        return true;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::graph::random_graph;
    use crate::semantics::models;

    #[test]
    fn single_vertex_for_a_proposition() {
        let d = parse("p").unwrap();
        let m = find_model(&d, &SearchBound::new(1, &["p"])).unwrap().unwrap();
        assert_eq!(m.graph.num_vertices(), 1);
        assert!(m.graph.has_label(0, "p"));
    }

    #[test]
    fn two_p_successors_with_a_self_loop() {
        let d = parse("#p >= 2").unwrap();
        let m = find_model(&d, &SearchBound::new(2, &["p"])).unwrap().unwrap();
        assert_eq!(m.graph.num_vertices(), 2);
        assert!(m.graph.has_edge(0, 0));
        assert!(find_model(&d, &SearchBound::new(1, &["p"])).unwrap().is_none());
    }

    #[test]
    fn small_example_formula() {
        let d = parse("p & (#!p >= 2) & (#(#p >= 1) <= 1)").unwrap();
        let m = find_model(&d, &SearchBound::for_formula(&d)).unwrap().unwrap();
        assert!(m.graph.num_vertices() <= 4);
    }

    #[test]
    fn raw_enumeration_count() {
        for n in 1..=3usize {
            for p in 0..=2usize {
                let mut count = 0u64;
                for_each_raw(n, p, &mut |_, _| {
                    count += 1;
                    true
                });
                assert_eq!(count, 1u64 << (n * n + p * n));
            }
        }
    }

    #[test]
    fn compiled_matches_model_checker() {
        let d = parse("def a := p | #q >= 2; (#a <= 2 * [a] + 1) | !(#(#!a >= 1) >= [q])").unwrap();
        let props = vec!["p".to_string(), "q".to_string()];
        let c = Compiled::new(&d, &props);
        let mut scratch = Vec::new();
        for seed in 0..200 {
            let g = random_graph(5, &props, 0.4, seed);
            let succ: Vec<u32> = (0..5).map(|u| g.successors(u).iter().fold(0, |m, v| m | 1 << v)).collect();
            let labels: Vec<u32> = (0..2).map(|p| (0..5).filter(|v| g.label(*v, p)).fold(0, |m, v| m | 1 << v)).collect();
            let mask = c.eval(&succ, &labels, &mut scratch);
            let expect = models(&g, &d);
            for v in 0..5 {
                assert_eq!(mask >> v & 1 == 1, expect[v]);
            }
        }
    }

    #[test]
    fn pruned_and_raw_searches_agree() {
        let props = vec!["p".to_string(), "q".to_string()];
        for src in [
            "#p >= 2 & #q <= 0",
            "p & !p",
            "#(p & q) >= 1 & #(#p >= 1) <= 0",
            "#(!p) >= 2 & !q & #(#true >= 2) >= 1",
            "#true >= 4",
        ] {
            let d = parse(src).unwrap();
            let pruned = find_model(&d, &SearchBound::new(3, &props)).unwrap();
            let raw = find_model_raw(&d, 3, &props);
            assert_eq!(pruned.is_some(), raw.is_some(), "{src}");
            if let Some(m) = pruned {
                assert!(check(&m.graph, m.point, &d));
            }
        }
    }

    #[test]
    fn candidate_limit() {
        let d = parse("p & !p").unwrap();
        let mut b = SearchBound::new(3, &["p"]);
        b.max_candidates = Some(10);
        assert_eq!(find_model(&d, &b), Err(OracleError::Limit(10)));
    }
}
