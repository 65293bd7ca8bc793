//! Translation with few layers: every boolean combination at a modal level
//! is put in conjunctive normal form, so each level costs at most three
//! layers (counting atoms, clauses, conjunctions).
//!
//! Indicator terms `1_ψ` are removed first by splitting on the truth values
//! of the `ψ`s, which turns an atom into a disjunction over assignments of
//! pure counting atoms. Both steps may blow up exponentially, so the total
//! CNF size is capped.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use thiserror::Error;

use super::top_rows;
use crate::formula::{normalize_atom, FormulaDag, FormulaNode, NodeId};
use crate::gnn::{GnnLayer, GnnModel, IntMatrix};
use crate::Int;

#[derive(Clone, Debug)]
pub struct ShallowOptions {
    /// Upper bound on the number of literals of any CNF built along the way.
    pub max_literals: usize,
    /// Upper bound on the number of indicator terms split in one atom.
    pub max_indicator_split: usize,
}

impl Default for ShallowOptions {
    fn default() -> Self {
        ShallowOptions { max_literals: 100_000, max_indicator_split: 16 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShallowError {
    #[error("conjunctive normal form exceeds the limit of {0} literals")]
    WidthLimit(usize),
    #[error("an atom has {found} indicator terms, more than the limit of {limit}")]
    IndicatorLimit { found: usize, limit: usize },
}

type Lit = (usize, bool);
type Clause = Vec<Lit>;
type Cnf = Vec<Clause>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Feature {
    Prop(String),
    Atom(Vec<(usize, Int)>, Int),
    Clause(Vec<Lit>),
    Conj(Vec<usize>),
}

struct Builder<'a> {
    dag: &'a FormulaDag,
    opts: &'a ShallowOptions,
    features: Vec<Feature>,
    level: Vec<usize>,
    ids: HashMap<Feature, usize>,
    cnf_memo: HashMap<(NodeId, bool), Cnf>,
    feature_memo: HashMap<NodeId, usize>,
}

impl Builder<'_> {
    fn intern(&mut self, f: Feature) -> usize {
        if let Some(i) = self.ids.get(&f) {
            return *i;
        }
        let level = match &f {
            Feature::Prop(_) => 0,
            Feature::Atom(terms, _) => 1 + terms.iter().map(|(a, _)| self.level[*a]).max().unwrap_or(0),
            Feature::Clause(lits) => 1 + lits.iter().map(|(a, _)| self.level[*a]).max().unwrap_or(0),
            Feature::Conj(cs) => 1 + cs.iter().map(|a| self.level[*a]).max().unwrap_or(0),
        };
        let i = self.features.len();
        self.features.push(f.clone());
        self.level.push(level);
        self.ids.insert(f, i);
        i
    }

    fn check(&self, c: Cnf) -> Result<Cnf, ShallowError> {
        let c = simplify(c);
        if c.iter().map(Vec::len).sum::<usize>() > self.opts.max_literals {
            return Err(ShallowError::WidthLimit(self.opts.max_literals));
        }
        Ok(c)
    }

    fn and(&self, x: Cnf, y: Cnf) -> Result<Cnf, ShallowError> {
        let mut x = x;
        x.extend(y);
        self.check(x)
    }

    fn or(&self, x: &Cnf, y: &Cnf) -> Result<Cnf, ShallowError> {
        if x.len().saturating_mul(y.len()) > self.opts.max_literals {
            return Err(ShallowError::WidthLimit(self.opts.max_literals));
        }
        let mut out = Vec::with_capacity(x.len() * y.len());
        for a in x {
            for b in y {
                let mut c = a.clone();
                c.extend(b.iter().copied());
                out.push(c);
            }
        }
        self.check(out)
    }

    fn pure_atom(&mut self, counts: Vec<(usize, Int)>, constant: Int, pol: bool) -> Cnf {
        if counts.is_empty() {
            return constant_cnf(!constant.is_negative() == pol);
        }
        let f = self.intern(Feature::Atom(counts, constant));
        vec![vec![(f, pol)]]
    }

    fn cnf(&mut self, node: NodeId, pol: bool) -> Result<Cnf, ShallowError> {
        if let Some(c) = self.cnf_memo.get(&(node, pol)) {
            return Ok(c.clone());
        }
        let out = match self.dag.formula(node) {
            FormulaNode::Prop(p) => {
                let f = self.intern(Feature::Prop(self.dag.prop_name(*p).to_string()));
                vec![vec![(f, pol)]]
            }
            FormulaNode::Not(a) => self.cnf(*a, !pol)?,
            FormulaNode::Or(a, b) => {
                let x = self.cnf(*a, pol)?;
                let y = self.cnf(*b, pol)?;
                if pol {
                    self.or(&x, &y)?
                } else {
                    self.and(x, y)?
                }
            }
            FormulaNode::GeqZero(e) => {
                let atom = normalize_atom(self.dag, e);
                let mut counts = Vec::new();
                for (f, k) in &atom.counts {
                    counts.push((self.feature(*f)?, k.clone()));
                }
                counts.sort();
                if atom.ones.len() > self.opts.max_indicator_split {
                    return Err(ShallowError::IndicatorLimit {
                        found: atom.ones.len(),
                        limit: self.opts.max_indicator_split,
                    });
                }
                let ones = atom.ones.clone();
                // Over all assignments s of the indicator arguments:
                // pol:  ⋁_s (⋀_j ψ_j = s_j  ∧  atom_s)
                // ¬pol: ⋀_s (⋁_j ψ_j ≠ s_j  ∨  ¬atom_s)
                let mut acc = constant_cnf(!pol);
                for s in 0u64..(1u64 << ones.len()) {
                    let mut constant = atom.constant.clone();
                    for (j, (_, k)) in ones.iter().enumerate() {
                        if s >> j & 1 == 1 {
                            constant += k;
                        }
                    }
                    let mut term = self.pure_atom(counts.clone(), constant, pol);
                    for (j, (f, _)) in ones.iter().enumerate() {
                        let bit = s >> j & 1 == 1;
                        let c = self.cnf(*f, if pol { bit } else { !bit })?;
                        term = if pol { self.and(term, c)? } else { self.or(&term, &c)? };
                    }
                    acc = if pol { self.or(&acc, &term)? } else { self.and(acc, term)? };
                }
                acc
            }
        };
        self.cnf_memo.insert((node, pol), out.clone());
        Ok(out)
    }

    /// The feature holding the truth of `node`.
    fn feature(&mut self, node: NodeId) -> Result<usize, ShallowError> {
        if let Some(f) = self.feature_memo.get(&node) {
            return Ok(*f);
        }
        let cnf = self.cnf(node, true)?;
        let f = match cnf.as_slice() {
            [c] if c.len() == 1 && c[0].1 => c[0].0,
            [c] => self.intern(Feature::Clause(c.clone())),
            _ => {
                let mut cs: Vec<usize> =
                    cnf.iter().map(|c| self.intern(Feature::Clause(c.clone()))).collect();
                cs.sort_unstable();
                cs.dedup();
                self.intern(Feature::Conj(cs))
            }
        };
        self.feature_memo.insert(node, f);
        Ok(f)
    }
}

fn constant_cnf(value: bool) -> Cnf {
    if value {
        Vec::new()
    } else {
        vec![Vec::new()]
    }
}

fn simplify(cnf: Cnf) -> Cnf {
    let mut out: Vec<Clause> = Vec::new();
    for mut c in cnf {
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0].0 == w[1].0) {
            continue;
        }
        if c.is_empty() {
            return vec![Vec::new()];
        }
        out.push(c);
    }
    out.sort();
    out.dedup();
    // drop clauses subsumed by a smaller one
    let mut kept: Vec<Clause> = Vec::new();
    out.sort_by_key(Vec::len);
    for c in out {
        if !kept.iter().any(|k| k.iter().all(|l| c.binary_search(l).is_ok())) {
            kept.push(c);
        }
    }
    kept.sort();
    kept
}

/// A GNN whose number of layers is at most `3·(md(φ)+1)`, at the price of
/// a possibly exponential width.
pub fn logic_to_gnn_shallow(dag: &FormulaDag, opts: &ShallowOptions) -> Result<GnnModel, ShallowError> {
    let root = dag.root();
    let mut b = Builder {
        dag,
        opts,
        features: Vec::new(),
        level: Vec::new(),
        ids: HashMap::new(),
        cnf_memo: HashMap::new(),
        feature_memo: HashMap::new(),
    };
    let props: Vec<String> = dag
        .subformulas(root)
        .into_iter()
        .filter_map(|n| dag.as_prop(n).map(String::from))
        .collect();
    for p in &props {
        b.intern(Feature::Prop(p.clone()));
    }
    let out = b.feature(root)?;
    let n = b.features.len();
    let mut c = IntMatrix::zeros(n, n);
    let mut a = IntMatrix::zeros(n, n);
    let mut bias = vec![Int::zero(); n];
    for (i, f) in b.features.iter().enumerate() {
        match f {
            Feature::Prop(_) => c.add(i, i, 1),
            Feature::Atom(terms, k) => {
                for (j, coeff) in terms {
                    a.add(*j, i, coeff.clone());
                }
                bias[i] = k + 1;
            }
            Feature::Clause(lits) => {
                let mut neg = 0i64;
                for (j, pos) in lits {
                    if *pos {
                        c.add(*j, i, 1);
                    } else {
                        c.add(*j, i, -1);
                        neg += 1;
                    }
                }
                bias[i] = Int::from(neg);
            }
            Feature::Conj(cs) => {
                for j in cs {
                    c.add(*j, i, 1);
                }
                bias[i] = Int::from(1 - cs.len() as i64);
            }
        }
    }
    let general = GnnLayer::new(c, a, bias);
    let depth = b.level[out].max(1);
    let mut layers = vec![Arc::new(top_rows(&general, props.len()))];
    let general = Arc::new(general);
    for _ in 1..depth {
        layers.push(Arc::clone(&general));
    }
    let mut cls = vec![Int::zero(); n];
    cls[out] = Int::from(1);
    Ok(GnnModel::new(props, layers, cls).expect("construction is well-formed"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::gnn::ints;
    use crate::graph::random_graph;
    use crate::semantics::models;

    fn agree(src: &str, props: &[&str]) -> GnnModel {
        let d = parse(src).unwrap();
        let m = logic_to_gnn_shallow(&d, &ShallowOptions::default()).unwrap();
        for seed in 0..40 {
            let g = random_graph(6, props, 0.35, seed);
            assert_eq!(m.classify(&g), models(&g, &d), "{src} seed {seed}");
        }
        m
    }

    #[test]
    fn wide_disjunction_in_one_layer() {
        let m = agree("p | q | !r", &["p", "q", "r"]);
        assert_eq!(m.num_layers(), 1);
        let l = &m.layers()[0];
        let col = l.out_dim() - 1;
        assert_eq!(l.b()[col], Int::from(1));
        let c = l.c().to_rows();
        let got: Vec<Int> = c.iter().map(|r| r[col].clone()).collect();
        assert_eq!(got, ints(&[1, 1, -1]));
    }

    #[test]
    fn propositional_formulas_need_at_most_two_layers() {
        let m = agree("(p | q) & (!p | r) & (q | !r)", &["p", "q", "r"]);
        assert!(m.num_layers() <= 2);
        let m = agree("!(p & q) <-> (r -> p)", &["p", "q", "r"]);
        assert!(m.num_layers() <= 2);
    }

    #[test]
    fn modal_formulas_agree_with_model_checking() {
        agree("(#musician >= 1) & (#true >= 3 * #tubaplayer)", &["musician", "tubaplayer"]);
        agree("[p & (#q <= 4)] <= #(#p >= 2)", &["p", "q"]);
        agree("!(p | (8 <= 3 * #q))", &["p", "q"]);
        agree("[[p] + #q >= 1] + 2 * [!q] - #(p | !q) >= 1", &["p", "q"]);
        agree("true", &["p"]);
        agree("!true | p", &["p"]);
    }

    #[test]
    fn layer_count_follows_modal_depth() {
        let d = parse("#(#(#p >= 1) >= 1) >= 1").unwrap();
        let m = logic_to_gnn_shallow(&d, &ShallowOptions::default()).unwrap();
        assert!(m.num_layers() <= 3 * (d.modal_depth(d.root()) + 1));
    }

    #[test]
    fn width_cap_is_enforced() {
        let src = (0..12).map(|i| format!("(a{i} & b{i})")).collect::<Vec<_>>().join(" | ");
        let d = parse(&src).unwrap();
        let opts = ShallowOptions { max_literals: 1000, ..Default::default() };
        assert_eq!(logic_to_gnn_shallow(&d, &opts).unwrap_err(), ShallowError::WidthLimit(1000));
    }
}
