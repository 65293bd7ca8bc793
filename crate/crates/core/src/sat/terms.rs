//! Hash-consed formulas: structurally equal subformulas get one id, atoms
//! are kept as merged linear forms, and double negations vanish.

use std::collections::HashMap;

use num_traits::Zero;

use crate::formula::{normalize_atom, FormulaDag, FormulaNode, NodeId, Slot};
use crate::Int;

pub(crate) type T = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Term {
    Prop(u32),
    Not(T),
    Or(T, T),
    /// `Σ ones + Σ counts + constant >= 0`, terms sorted by id.
    Atom { ones: Vec<(T, Int)>, counts: Vec<(T, Int)>, constant: Int },
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Terms {
    pub terms: Vec<Term>,
    pub props: Vec<String>,
    index: HashMap<Term, T>,
    prop_index: HashMap<String, u32>,
}

impl Terms {
    pub fn get(&self, t: T) -> &Term {
        &self.terms[t as usize]
    }

    fn intern(&mut self, term: Term) -> T {
        if let Some(t) = self.index.get(&term) {
            return *t;
        }
        let t = self.terms.len() as T;
        self.terms.push(term.clone());
        self.index.insert(term, t);
        t
    }

    pub fn prop(&mut self, name: &str) -> T {
        let p = match self.prop_index.get(name) {
            Some(p) => *p,
            None => {
                let p = self.props.len() as u32;
                self.props.push(name.to_string());
                self.prop_index.insert(name.to_string(), p);
                p
            }
        };
        self.intern(Term::Prop(p))
    }

    pub fn not(&mut self, a: T) -> T {
        if let Term::Not(b) = self.get(a) {
            return *b;
        }
        self.intern(Term::Not(a))
    }

    pub fn or(&mut self, a: T, b: T) -> T {
        self.intern(Term::Or(a, b))
    }

    pub fn atom(&mut self, ones: Vec<(T, Int)>, counts: Vec<(T, Int)>, constant: Int) -> T {
        self.intern(Term::Atom { ones: merged(ones), counts: merged(counts), constant })
    }

    /// Interns every formula node reachable from `root`; returns the root's id.
    pub fn import(&mut self, dag: &FormulaDag, root: NodeId) -> T {
        let (fseen, _) = dag.reachable(root);
        let mut map: HashMap<NodeId, T> = HashMap::new();
        for slot in dag.creation_order() {
            let Slot::Formula(id) = *slot else { continue };
            if !fseen[id.index()] {
                continue;
            }
            let t = match dag.formula(id) {
                FormulaNode::Prop(p) => self.prop(dag.prop_name(*p)),
                FormulaNode::Not(a) => self.not(map[a]),
                FormulaNode::Or(a, b) => self.or(map[a], map[b]),
                FormulaNode::GeqZero(e) => {
                    let a = normalize_atom(dag, e);
                    let ones = a.ones.iter().map(|(f, k)| (map[f], k.clone())).collect();
                    let counts = a.counts.iter().map(|(f, k)| (map[f], k.clone())).collect();
                    self.atom(ones, counts, a.constant)
                }
            };
            map.insert(id, t);
        }
        map[&root]
    }
}

fn merged(mut v: Vec<(T, Int)>) -> Vec<(T, Int)> {
    v.sort_by_key(|(t, _)| *t);
    let mut out: Vec<(T, Int)> = Vec::with_capacity(v.len());
    for (t, k) in v {
        match out.last_mut() {
            Some((u, c)) if *u == t => *c += k,
            _ => out.push((t, k)),
        }
    }
    out.retain(|(_, k)| !k.is_zero());
    out
}
