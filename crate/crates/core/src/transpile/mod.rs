//! Formula to GNN and GNN to formula translations.

mod shallow;

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::formula::{normalize_atom, FormulaDag, FormulaNode, NodeId};
use crate::gnn::{GnnLayer, GnnModel, IntMatrix};
use crate::Int;

pub use shallow::{logic_to_gnn_shallow, ShallowError, ShallowOptions};

/// Subformulas `φ_1 .. φ_n` of a root: propositions first, every formula
/// after its subformulas, the root last.
#[derive(Clone, Debug)]
pub struct SubformulaEnumeration {
    pub nodes: Vec<NodeId>,
    pub index: HashMap<NodeId, usize>,
    /// Number of leading propositions.
    pub num_props: usize,
}

impl SubformulaEnumeration {
    pub fn new(dag: &FormulaDag, root: NodeId) -> Self {
        let nodes = dag.subformulas(root);
        let index = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let num_props = nodes.iter().take_while(|n| dag.as_prop(**n).is_some()).count();
        SubformulaEnumeration { nodes, index, num_props }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// The uniform combination layer: column `i` computes `φ_i` from the
/// values of its immediate subformulas.
pub fn combination_layer(dag: &FormulaDag, en: &SubformulaEnumeration) -> GnnLayer {
    let n = en.len();
    let mut c = IntMatrix::zeros(n, n);
    let mut a = IntMatrix::zeros(n, n);
    let mut b = vec![Int::zero(); n];
    for (i, node) in en.nodes.iter().enumerate() {
        match dag.formula(*node) {
            FormulaNode::Prop(_) => c.add(i, i, 1),
            FormulaNode::Not(x) => {
                c.add(en.index[x], i, -1);
                b[i] = Int::one();
            }
            FormulaNode::Or(x, y) => {
                c.add(en.index[x], i, 1);
                c.add(en.index[y], i, 1);
            }
            FormulaNode::GeqZero(e) => {
                let atom = normalize_atom(dag, e);
                for (f, k) in &atom.ones {
                    c.add(en.index[f], i, k.clone());
                }
                for (f, k) in &atom.counts {
                    a.add(en.index[f], i, k.clone());
                }
                b[i] = &atom.constant + 1;
            }
        }
    }
    GnnLayer::new(c, a, b)
}

/// The first `rows` input rows of `layer`, same bias.
pub(crate) fn top_rows(layer: &GnnLayer, rows: usize) -> GnnLayer {
    let out = layer.out_dim();
    let mut c = IntMatrix::zeros(rows, out);
    let mut a = IntMatrix::zeros(rows, out);
    for j in 0..out {
        for (i, v) in layer.c().column(j) {
            if *i < rows {
                c.add(*i, j, v.clone());
            }
        }
        for (i, v) in layer.a().column(j) {
            if *i < rows {
                a.add(*i, j, v.clone());
            }
        }
    }
    GnnLayer::new(c, a, layer.b().to_vec())
}

/// A GNN with one layer per subformula. Every layer but the first applies
/// [`combination_layer`]; the first applies its proposition rows only, since
/// the input state carries just the propositions. After layer `t`,
/// coordinate `j` holds the truth of `φ_j` for every `j <= t`.
pub fn logic_to_gnn(dag: &FormulaDag) -> GnnModel {
    let root = dag.root();
    let en = SubformulaEnumeration::new(dag, root);
    let n = en.len();
    let m = en.num_props;
    let general = combination_layer(dag, &en);
    let first = Arc::new(top_rows(&general, m));
    let general = Arc::new(general);
    let mut layers = Vec::with_capacity(n);
    layers.push(first);
    for _ in 1..n {
        layers.push(Arc::clone(&general));
    }
    let props = en.nodes[..m].iter().map(|p| dag.as_prop(*p).unwrap().to_string()).collect();
    let mut cls = vec![Int::zero(); n];
    cls[n - 1] = Int::one();
    GnnModel::new(props, layers, cls).expect("construction is well-formed")
}

/// The formula `Σ_k coeff_one[k]·1_{in_k} + Σ_k coeff_count[k]·#in_k + bias >= 1`,
/// skipping zero coefficients and writing coefficient 1 without a product.
fn threshold_formula(
    dag: &mut FormulaDag,
    inputs: &[NodeId],
    ones: &[(usize, &Int)],
    counts: &[(usize, &Int)],
    bias: &Int,
) -> NodeId {
    let mut terms = Vec::new();
    for (k, coeff) in ones {
        let t = dag.one(inputs[*k]);
        terms.push(if coeff.is_one() { t } else { dag.scale((*coeff).clone(), t) });
    }
    for (k, coeff) in counts {
        let t = dag.count(inputs[*k]);
        terms.push(if coeff.is_one() { t } else { dag.scale((*coeff).clone(), t) });
    }
    if !bias.is_zero() || terms.is_empty() {
        terms.push(dag.constant(bias.clone()));
    }
    let mut it = terms.into_iter();
    let first = it.next().unwrap();
    let sum = it.fold(first, |acc, t| dag.add(acc, t));
    let one = dag.constant(1);
    dag.ge(sum, one)
}

/// A formula dag equivalent to the GNN. Each neuron `j` of layer `i` becomes
/// one shared node `φ_{i,j}`; the root is the classifier atom itself.
pub fn gnn_to_logic(m: &GnnModel) -> FormulaDag {
    let mut dag = FormulaDag::new();
    let mut prev: Vec<NodeId> = m.propositions().iter().map(|p| dag.prop(p)).collect();
    for layer in m.layers() {
        let mut ones: Vec<Vec<(usize, &Int)>> = vec![Vec::new(); layer.out_dim()];
        let mut counts: Vec<Vec<(usize, &Int)>> = vec![Vec::new(); layer.out_dim()];
        for j in 0..layer.out_dim() {
            for (k, v) in layer.c().column(j) {
                ones[j].push((*k, v));
            }
            for (k, v) in layer.a().column(j) {
                counts[j].push((*k, v));
            }
        }
        let next: Vec<NodeId> = (0..layer.out_dim())
            .map(|j| threshold_formula(&mut dag, &prev, &ones[j], &counts[j], &layer.b()[j]))
            .collect();
        prev = next;
    }
    let cls: Vec<(usize, &Int)> = m.cls().iter().enumerate().filter(|(_, a)| !a.is_zero()).collect();
    let root = threshold_formula(&mut dag, &prev, &cls, &[], &Int::zero());
    dag.set_root(root);
    dag
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{is_isomorphic, parse};
    use crate::gnn::ints;
    use crate::graph::random_graph;
    use crate::semantics::{evaluate, models};

    #[test]
    fn negated_disjunction_matrices() {
        let d = parse("!(p | (8 <= 3 * #q))").unwrap();
        let g = logic_to_gnn(&d);
        assert_eq!(g.num_layers(), 5);
        let l = &g.layers()[1];
        let c = l.c().to_rows();
        let a = l.a().to_rows();
        assert_eq!(
            c,
            vec![
                ints(&[1, 0, 0, 1, 0]),
                ints(&[0, 1, 0, 0, 0]),
                ints(&[0, 0, 0, 1, 0]),
                ints(&[0, 0, 0, 0, -1]),
                ints(&[0, 0, 0, 0, 0]),
            ]
        );
        let mut expected_a = vec![ints(&[0; 5]); 5];
        expected_a[1][2] = Int::from(3);
        assert_eq!(a, expected_a);
        assert_eq!(l.b(), &ints(&[0, 0, -7, 0, 1])[..]);
        assert_eq!(g.layers()[0].c().to_rows(), c[..2].to_vec());
        assert_eq!(g.cls(), &ints(&[0, 0, 0, 0, 1])[..]);
    }

    #[test]
    fn single_proposition() {
        let d = parse("p").unwrap();
        let g = logic_to_gnn(&d);
        assert_eq!(g.num_layers(), 1);
        assert_eq!(g.layers()[0].c().to_rows(), vec![ints(&[1])]);
        assert_eq!(g.layers()[0].a().to_rows(), vec![ints(&[0])]);
        assert_eq!(g.layers()[0].b(), &ints(&[0])[..]);
    }

    #[test]
    fn state_tracks_subformulas_layer_by_layer() {
        let d = parse("(#musician >= 1) & (#true >= 3 * #tubaplayer) | !([musician] + #!tubaplayer >= 2)").unwrap();
        let en = SubformulaEnumeration::new(&d, d.root());
        let gnn = logic_to_gnn(&d);
        for seed in 0..20 {
            let g = random_graph(6, &["musician", "tubaplayer"], 0.4, seed);
            let val = evaluate(&d, d.root(), &g);
            let st = gnn.forward(&g);
            for t in 1..=gnn.num_layers() {
                for v in 0..g.num_vertices() {
                    for j in 0..t.min(en.len()) {
                        assert_eq!(st.get(t, v)[j] == 1, val.holds(en.nodes[j], v));
                    }
                }
            }
        }
    }

    #[test]
    fn decompiles_two_layer_example() {
        let c = vec![ints(&[1, 6]), ints(&[2, 7])];
        let a = vec![ints(&[-3, 8]), ints(&[4, -9])];
        let layer = GnnLayer::from_dense(&c, &a, ints(&[5, 10]));
        let m = GnnModel::from_layers(
            vec!["p1".into(), "p2".into()],
            vec![layer.clone(), layer],
            ints(&[5, -3]),
        )
        .unwrap();
        let got = gnn_to_logic(&m);
        let expected = parse(
            "def f11 := [p1] + 2 * [p2] + -3 * #p1 + 4 * #p2 + 5 >= 1;
             def f12 := 6 * [p1] + 7 * [p2] + 8 * #p1 + -9 * #p2 + 10 >= 1;
             def f21 := [f11] + 2 * [f12] + -3 * #f11 + 4 * #f12 + 5 >= 1;
             def f22 := 6 * [f11] + 7 * [f12] + 8 * #f11 + -9 * #f12 + 10 >= 1;
             5 * [f21] + -3 * [f22] >= 1",
        )
        .unwrap();
        assert!(is_isomorphic(&got, &expected, false), "{got}");
        for seed in 0..30 {
            let g = random_graph(7, &["p1", "p2"], 0.35, seed);
            assert_eq!(models(&g, &got), m.classify(&g));
        }
    }

    #[test]
    fn zero_layer_model_decompiles_to_indicator_sum() {
        let m = GnnModel::from_layers(vec!["p".into(), "q".into()], vec![], ints(&[2, -1])).unwrap();
        let got = gnn_to_logic(&m);
        let expected = parse("2 * [p] + -1 * [q] >= 1").unwrap();
        assert!(is_isomorphic(&got, &expected, false));
    }
}
