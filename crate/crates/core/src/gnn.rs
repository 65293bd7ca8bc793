//! Aggregate-combine GNNs with integer parameters and truncated ReLU.
//!
//! A layer computes `x'(u) = σ(x(u)·C + (Σ_{u→v} x(v))·A + b)` with
//! `σ(z) = max(0, min(1, z))`; the classifier accepts `u` when
//! `Σ a_i x_L(u)_i >= 1`. Starting from 0/1 proposition indicators, every
//! state entry stays in {0, 1}, so evaluation is exact integer arithmetic.
//!
//! Matrices are stored sparsely and layers are reference counted, so models
//! with many identical layers stay small in memory.

use std::path::Path;
use std::sync::{Arc, OnceLock};

use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::graph::LabeledGraph;
use crate::Int;

#[derive(Debug, Error)]
pub enum GnnError {
    #[error("invalid GNN JSON: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("invalid GNN JSON: {0}")]
    Shape(String),
    #[error("non-integer entry {value} at {location}")]
    NonInteger { location: String, value: String },
    #[error("layer {layer}: {matrix} row {row} has {found} entries, expected {expected}")]
    Ragged { layer: usize, matrix: &'static str, row: usize, expected: usize, found: usize },
    #[error("layer {layer}: C has {c_rows} rows but A has {a_rows}")]
    InnerMismatch { layer: usize, c_rows: usize, a_rows: usize },
    #[error("layer 1 has input dimension {found}, expected {expected} (one per proposition)")]
    InputDim { expected: usize, found: usize },
    #[error("layer {from} has output dimension {out_dim} but layer {to} has input dimension {in_dim}")]
    Chain { from: usize, to: usize, out_dim: usize, in_dim: usize },
    #[error("classifier has {found} coefficients, expected {expected}")]
    ClsDim { expected: usize, found: usize },
    #[error("duplicate proposition `{0}`")]
    DuplicateProposition(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Sparse integer matrix, stored by column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    columns: Vec<Vec<(usize, Int)>>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, columns: vec![Vec::new(); cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Int {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        match self.columns[j].binary_search_by_key(&i, |(r, _)| *r) {
            Ok(k) => self.columns[j][k].1.clone(),
            Err(_) => Int::zero(),
        }
    }

    /// Adds `v` to entry `(i, j)`.
    pub fn add(&mut self, i: usize, j: usize, v: impl Into<Int>) {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        let v = v.into();
        let col = &mut self.columns[j];
        match col.binary_search_by_key(&i, |(r, _)| *r) {
            Ok(k) => {
                col[k].1 += v;
                if col[k].1.is_zero() {
                    col.remove(k);
                }
            }
            Err(k) => {
                if !v.is_zero() {
                    col.insert(k, (i, v));
                }
            }
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: impl Into<Int>) {
        let v = v.into();
        let cur = self.get(i, j);
        self.add(i, j, v - cur);
    }

    /// Nonzero entries of column `j` as `(row, value)`, by increasing row.
    pub fn column(&self, j: usize) -> &[(usize, Int)] {
        &self.columns[j]
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn from_rows(rows: &[Vec<Int>], cols: usize) -> Self {
        let mut m = IntMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix");
            for (j, v) in r.iter().enumerate() {
                m.add(i, j, v.clone());
            }
        }
        m
    }

    pub fn to_rows(&self) -> Vec<Vec<Int>> {
        let mut out = vec![vec![Int::zero(); self.cols]; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, v) in col {
                out[*i][j] = v.clone();
            }
        }
        out
    }
}

/// One combine step: `C` and `A` are `in_dim × out_dim`, `b` has `out_dim`
/// entries.
#[derive(Debug)]
pub struct GnnLayer {
    c: IntMatrix,
    a: IntMatrix,
    b: Vec<Int>,
    fast: OnceLock<Option<FastLayer>>,
}

impl Clone for GnnLayer {
    fn clone(&self) -> Self {
        GnnLayer::new(self.c.clone(), self.a.clone(), self.b.clone())
    }
}

impl PartialEq for GnnLayer {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c && self.a == other.a && self.b == other.b
    }
}

impl Eq for GnnLayer {}

#[derive(Debug)]
struct FastLayer {
    c: Vec<Vec<(usize, i64)>>,
    a: Vec<Vec<(usize, i64)>>,
    b: Vec<i64>,
}

impl GnnLayer {
    /// Panics if the shapes disagree; use [`GnnModel::new`] to validate
    /// data coming from outside.
    pub fn new(c: IntMatrix, a: IntMatrix, b: Vec<Int>) -> Self {
        assert_eq!(c.rows, a.rows, "C and A must have the same input dimension");
        assert_eq!(c.cols, b.len(), "C must have one column per bias entry");
        assert_eq!(a.cols, b.len(), "A must have one column per bias entry");
        GnnLayer { c, a, b, fast: OnceLock::new() }
    }

    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        GnnLayer::new(
            IntMatrix::zeros(in_dim, out_dim),
            IntMatrix::zeros(in_dim, out_dim),
            vec![Int::zero(); out_dim],
        )
    }

    pub fn from_dense(c: &[Vec<Int>], a: &[Vec<Int>], b: Vec<Int>) -> Self {
        let out = b.len();
        GnnLayer::new(IntMatrix::from_rows(c, out), IntMatrix::from_rows(a, out), b)
    }

    pub fn in_dim(&self) -> usize {
        self.c.rows
    }

    pub fn out_dim(&self) -> usize {
        self.b.len()
    }

    pub fn c(&self) -> &IntMatrix {
        &self.c
    }

    pub fn a(&self) -> &IntMatrix {
        &self.a
    }

    pub fn b(&self) -> &[Int] {
        &self.b
    }

    pub fn c_mut(&mut self) -> &mut IntMatrix {
        self.fast = OnceLock::new();
        &mut self.c
    }

    pub fn a_mut(&mut self) -> &mut IntMatrix {
        self.fast = OnceLock::new();
        &mut self.a
    }

    pub fn b_mut(&mut self) -> &mut Vec<Int> {
        self.fast = OnceLock::new();
        &mut self.b
    }

    /// Number of nonzero parameters.
    pub fn nnz(&self) -> usize {
        self.c.nnz() + self.a.nnz() + self.b.iter().filter(|x| !x.is_zero()).count()
    }

    fn fast(&self) -> Option<&FastLayer> {
        self.fast
            .get_or_init(|| {
                let conv = |m: &IntMatrix| -> Option<Vec<Vec<(usize, i64)>>> {
                    m.columns
                        .iter()
                        .map(|col| col.iter().map(|(i, v)| v.to_i64().map(|x| (*i, x))).collect())
                        .collect()
                };
                Some(FastLayer {
                    c: conv(&self.c)?,
                    a: conv(&self.a)?,
                    b: self.b.iter().map(|x| x.to_i64()).collect::<Option<_>>()?,
                })
            })
            .as_ref()
    }

    /// Applies the layer to all vertices. `x` holds `in_dim` entries per
    /// vertex, flattened.
    pub fn apply(&self, g: &LabeledGraph, x: &[u8]) -> Vec<u8> {
        let n = g.num_vertices();
        let din = self.in_dim();
        let dout = self.out_dim();
        debug_assert_eq!(x.len(), n * din);
        let mut y = vec![0u32; n * din];
        for v in 0..n {
            let row = &mut y[v * din..(v + 1) * din];
            for &w in g.successors(v) {
                for (acc, xi) in row.iter_mut().zip(&x[w * din..(w + 1) * din]) {
                    *acc += *xi as u32;
                }
            }
        }
        let mut out = vec![0u8; n * dout];
        match self.fast() {
            Some(f) => {
                for v in 0..n {
                    let xv = &x[v * din..(v + 1) * din];
                    let yv = &y[v * din..(v + 1) * din];
                    for j in 0..dout {
                        let mut z = f.b[j] as i128;
                        for (i, c) in &f.c[j] {
                            if xv[*i] != 0 {
                                z += *c as i128;
                            }
                        }
                        for (i, a) in &f.a[j] {
                            z += *a as i128 * yv[*i] as i128;
                        }
                        out[v * dout + j] = z.clamp(0, 1) as u8;
                    }
                }
            }
            None => {
                for v in 0..n {
                    let xv = &x[v * din..(v + 1) * din];
                    let yv = &y[v * din..(v + 1) * din];
                    for j in 0..dout {
                        let mut z = self.b[j].clone();
                        for (i, c) in self.c.column(j) {
                            if xv[*i] != 0 {
                                z += c;
                            }
                        }
                        for (i, a) in self.a.column(j) {
                            if yv[*i] != 0 {
                                z += a * Int::from(yv[*i]);
                            }
                        }
                        out[v * dout + j] = if z.is_positive() { 1 } else { 0 };
                    }
                }
            }
        }
        out
    }
}

/// A well-formed GNN: input propositions, a chain of layers and classifier
/// coefficients over the last layer's output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GnnModel {
    props: Vec<String>,
    layers: Vec<Arc<GnnLayer>>,
    cls: Vec<Int>,
}

/// States `x_0 .. x_L`, each flattened vertex-major.
#[derive(Clone, Debug)]
pub struct States {
    pub dims: Vec<usize>,
    pub data: Vec<Vec<u8>>,
}

impl States {
    pub fn get(&self, t: usize, v: usize) -> &[u8] {
        let d = self.dims[t];
        &self.data[t][v * d..(v + 1) * d]
    }
}

impl GnnModel {
    pub fn new(props: Vec<String>, layers: Vec<Arc<GnnLayer>>, cls: Vec<Int>) -> Result<Self, GnnError> {
        let m = GnnModel { props, layers, cls };
        m.validate()?;
        Ok(m)
    }

    pub fn from_layers(props: Vec<String>, layers: Vec<GnnLayer>, cls: Vec<Int>) -> Result<Self, GnnError> {
        Self::new(props, layers.into_iter().map(Arc::new).collect(), cls)
    }

    /// Dimension chain checks. Layers are numbered from 1 in messages.
    pub fn validate(&self) -> Result<(), GnnError> {
        let mut seen = std::collections::HashSet::new();
        for p in &self.props {
            if !seen.insert(p) {
                return Err(GnnError::DuplicateProposition(p.clone()));
            }
        }
        let mut dim = self.props.len();
        for (i, l) in self.layers.iter().enumerate() {
            if l.in_dim() != dim {
                return Err(if i == 0 {
                    GnnError::InputDim { expected: dim, found: l.in_dim() }
                } else {
                    GnnError::Chain { from: i, to: i + 1, out_dim: dim, in_dim: l.in_dim() }
                });
            }
            dim = l.out_dim();
        }
        if self.cls.len() != dim {
            return Err(GnnError::ClsDim { expected: dim, found: self.cls.len() });
        }
        Ok(())
    }

    /// One layer with `b = (1)` and zero matrices, classifier `x_1 >= 1`:
    /// accepts every pointed graph.
    pub fn accept_all(props: Vec<String>) -> Self {
        let k = props.len();
        let mut l = GnnLayer::zeros(k, 1);
        l.b_mut()[0] = Int::from(1);
        GnnModel::from_layers(props, vec![l], vec![Int::from(1)]).expect("well-formed")
    }

    /// Same layer as [`GnnModel::accept_all`] with classifier coefficient 0.
    pub fn reject_all(props: Vec<String>) -> Self {
        let k = props.len();
        let mut l = GnnLayer::zeros(k, 1);
        l.b_mut()[0] = Int::from(1);
        GnnModel::from_layers(props, vec![l], vec![Int::zero()]).expect("well-formed")
    }

    pub fn propositions(&self) -> &[String] {
        &self.props
    }

    pub fn layers(&self) -> &[Arc<GnnLayer>] {
        &self.layers
    }

    pub fn cls(&self) -> &[Int] {
        &self.cls
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Total number of nonzero parameters (layers and classifier).
    pub fn nnz(&self) -> usize {
        self.layers.iter().map(|l| l.nnz()).sum::<usize>()
            + self.cls.iter().filter(|x| !x.is_zero()).count()
    }

    /// Sum of all layer dimensions, counting the input.
    pub fn num_neurons(&self) -> usize {
        self.props.len() + self.layers.iter().map(|l| l.out_dim()).sum::<usize>()
    }

    /// `x_0`: proposition indicators, unknown propositions false.
    pub fn initial_state(&self, g: &LabeledGraph) -> Vec<u8> {
        let k = self.props.len();
        let idx: Vec<Option<usize>> = self.props.iter().map(|p| g.prop_index(p)).collect();
        let mut x = vec![0u8; g.num_vertices() * k];
        for v in 0..g.num_vertices() {
            for (i, gp) in idx.iter().enumerate() {
                if let Some(gp) = gp {
                    x[v * k + i] = g.label(v, *gp) as u8;
                }
            }
        }
        x
    }

    /// All states `x_0 .. x_L`.
    pub fn forward(&self, g: &LabeledGraph) -> States {
        let mut dims = vec![self.props.len()];
        let mut data = vec![self.initial_state(g)];
        for l in &self.layers {
            let next = l.apply(g, data.last().unwrap());
            dims.push(l.out_dim());
            data.push(next);
        }
        States { dims, data }
    }

    /// The last state only.
    pub fn final_state(&self, g: &LabeledGraph) -> Vec<u8> {
        let mut x = self.initial_state(g);
        for l in &self.layers {
            x = l.apply(g, &x);
        }
        x
    }

    /// `cls(x) = Σ a_i x_i >= 1` on one state vector.
    pub fn accepts_state(&self, x: &[u8]) -> bool {
        let mut s = Int::zero();
        for (a, xi) in self.cls.iter().zip(x) {
            if *xi != 0 {
                s += a;
            }
        }
        s >= Int::from(1)
    }

    /// Acceptance of every vertex.
    pub fn classify(&self, g: &LabeledGraph) -> Vec<bool> {
        let x = self.final_state(g);
        let d = self.cls.len();
        (0..g.num_vertices()).map(|v| self.accepts_state(&x[v * d..(v + 1) * d])).collect()
    }

    pub fn to_value(&self) -> Value {
        let mut root = Map::new();
        root.insert(
            "propositions".into(),
            Value::Array(self.props.iter().cloned().map(Value::String).collect()),
        );
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let mut m = Map::new();
                m.insert("C".into(), matrix_value(&l.c));
                m.insert("A".into(), matrix_value(&l.a));
                m.insert("b".into(), Value::Array(l.b.iter().map(int_value).collect()));
                Value::Object(m)
            })
            .collect();
        root.insert("layers".into(), Value::Array(layers));
        root.insert("cls".into(), Value::Array(self.cls.iter().map(int_value).collect()));
        Value::Object(root)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_value()).expect("GNN serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GnnError> {
        let v: Value = serde_json::from_str(text)?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self, GnnError> {
        let obj = v.as_object().ok_or_else(|| GnnError::Shape("expected an object".into()))?;
        for k in obj.keys() {
            if !["propositions", "layers", "cls"].contains(&k.as_str()) {
                return Err(GnnError::Shape(format!("unknown field `{k}`")));
            }
        }
        let field = |k: &str| obj.get(k).ok_or_else(|| GnnError::Shape(format!("missing field `{k}`")));
        let props: Vec<String> = serde_json::from_value(field("propositions")?.clone())?;
        let raw_layers = field("layers")?
            .as_array()
            .ok_or_else(|| GnnError::Shape("`layers` must be an array".into()))?;
        let mut layers = Vec::new();
        let mut dim = props.len();
        for (li, lv) in raw_layers.iter().enumerate() {
            let layer = li + 1;
            let lo = lv
                .as_object()
                .ok_or_else(|| GnnError::Shape(format!("layer {layer} must be an object")))?;
            for k in lo.keys() {
                if !["C", "A", "b"].contains(&k.as_str()) {
                    return Err(GnnError::Shape(format!("layer {layer}: unknown field `{k}`")));
                }
            }
            let get = |k: &str| {
                lo.get(k).ok_or_else(|| GnnError::Shape(format!("layer {layer}: missing field `{k}`")))
            };
            let b = int_vector(get("b")?, &format!("layer {layer} b"))?;
            let c = int_rows(get("C")?, &format!("layer {layer} C"))?;
            let a = int_rows(get("A")?, &format!("layer {layer} A"))?;
            for (name, m) in [("C", &c), ("A", &a)] {
                for (r, row) in m.iter().enumerate() {
                    if row.len() != b.len() {
                        return Err(GnnError::Ragged {
                            layer,
                            matrix: name,
                            row: r + 1,
                            expected: b.len(),
                            found: row.len(),
                        });
                    }
                }
            }
            if c.len() != a.len() {
                return Err(GnnError::InnerMismatch { layer, c_rows: c.len(), a_rows: a.len() });
            }
            if c.len() != dim {
                return Err(if li == 0 {
                    GnnError::InputDim { expected: dim, found: c.len() }
                } else {
                    GnnError::Chain { from: li, to: layer, out_dim: dim, in_dim: c.len() }
                });
            }
            dim = b.len();
            layers.push(GnnLayer::from_dense(&c, &a, b));
        }
        let cls = int_vector(field("cls")?, "cls")?;
        GnnModel::from_layers(props, layers, cls)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GnnError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GnnError> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

pub(crate) fn int_value(x: &Int) -> Value {
    Value::Number(x.to_string().parse::<Number>().expect("integer is a JSON number"))
}

fn matrix_value(m: &IntMatrix) -> Value {
    Value::Array(m.to_rows().iter().map(|r| Value::Array(r.iter().map(int_value).collect())).collect())
}

fn parse_int(v: &Value, location: &str) -> Result<Int, GnnError> {
    let bad = || GnnError::NonInteger { location: location.to_string(), value: v.to_string() };
    match v {
        Value::Number(n) => n.to_string().parse::<Int>().map_err(|_| bad()),
        _ => Err(bad()),
    }
}

fn int_vector(v: &Value, location: &str) -> Result<Vec<Int>, GnnError> {
    let arr = v.as_array().ok_or_else(|| GnnError::Shape(format!("{location} must be an array")))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| parse_int(x, &format!("{location}[{}]", i + 1)))
        .collect()
}

fn int_rows(v: &Value, location: &str) -> Result<Vec<Vec<Int>>, GnnError> {
    let arr = v.as_array().ok_or_else(|| GnnError::Shape(format!("{location} must be an array")))?;
    arr.iter()
        .enumerate()
        .map(|(i, r)| int_vector(r, &format!("{location} row {}", i + 1)))
        .collect()
}

/// Shorthand for building integer vectors in tests and examples.
pub fn ints(xs: &[i64]) -> Vec<Int> {
    xs.iter().map(|x| Int::from(*x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random_graph;

    fn two_by_two_layer() -> GnnLayer {
        // two-dimensional layer used by the decompilation example
        let c = vec![ints(&[1, 6]), ints(&[2, 7])];
        let a = vec![ints(&[-3, 8]), ints(&[4, -9])];
        GnnLayer::from_dense(&c, &a, ints(&[5, 10]))
    }

    #[test]
    fn zero_layers_classify_raw_features() {
        let m = GnnModel::from_layers(vec!["p".into(), "q".into()], vec![], ints(&[1, 0])).unwrap();
        let g = random_graph(5, &["p", "q"], 0.5, 2);
        let got = m.classify(&g);
        for (v, acc) in got.iter().enumerate() {
            assert_eq!(*acc, g.has_label(v, "p"));
        }
    }

    #[test]
    fn chain_mismatch_names_layers() {
        let l1 = GnnLayer::zeros(1, 3);
        let l2 = GnnLayer::zeros(4, 1);
        let err = GnnModel::from_layers(vec!["p".into()], vec![l1, l2], ints(&[1])).unwrap_err();
        assert!(matches!(err, GnnError::Chain { from: 1, to: 2, out_dim: 3, in_dim: 4 }));
        assert!(err.to_string().contains("layer 1") && err.to_string().contains("layer 2"));
    }

    #[test]
    fn two_layer_example_validates() {
        let m = GnnModel::from_layers(
            vec!["p".into(), "q".into()],
            vec![two_by_two_layer(), two_by_two_layer()],
            ints(&[5, -3]),
        )
        .unwrap();
        assert_eq!(m.num_layers(), 2);
        let bad = GnnModel::from_layers(vec!["p".into(), "q".into()], vec![two_by_two_layer()], ints(&[1]));
        assert!(matches!(bad, Err(GnnError::ClsDim { .. })));
    }

    #[test]
    fn aggregation_sums_successors() {
        // C = 0, A = identity, b = 0: x_1(u)_i = min(1, number of successors with p_i)
        let mut l = GnnLayer::zeros(1, 1);
        l.a_mut().set(0, 0, 1);
        let m = GnnModel::from_layers(vec!["p".into()], vec![l], ints(&[1])).unwrap();
        let g = random_graph(6, &["p"], 0.4, 5);
        let got = m.classify(&g);
        for u in 0..6 {
            let any = g.successors(u).iter().any(|v| g.has_label(*v, "p"));
            assert_eq!(got[u], any);
        }
    }

    #[test]
    fn accept_and_reject_all() {
        let g = random_graph(4, &["p"], 0.5, 1);
        assert!(GnnModel::accept_all(vec!["p".into()]).classify(&g).iter().all(|x| *x));
        assert!(GnnModel::reject_all(vec!["p".into()]).classify(&g).iter().all(|x| !*x));
    }

    #[test]
    fn no_edges_zero_bias_gives_zero_state() {
        let l = GnnLayer::zeros(2, 3);
        let m = GnnModel::from_layers(vec!["p".into(), "q".into()], vec![l], ints(&[1, 1, 1])).unwrap();
        let g = random_graph(4, &["p", "q"], 0.0, 7);
        assert!(m.forward(&g).data[1].iter().all(|x| *x == 0));
    }

    #[test]
    fn big_coefficients_use_exact_path() {
        let huge: Int = "100000000000000000000000".parse().unwrap();
        let mut l = GnnLayer::zeros(1, 1);
        l.c_mut().set(0, 0, huge.clone());
        l.b_mut()[0] = -huge + 1;
        let m = GnnModel::from_layers(vec!["p".into()], vec![l], ints(&[1])).unwrap();
        let g = random_graph(6, &["p"], 0.5, 3);
        let got = m.classify(&g);
        for v in 0..6 {
            assert_eq!(got[v], g.has_label(v, "p"));
        }
        let back = GnnModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn json_rejects_non_integers() {
        let text = r#"{"propositions":["p"],"layers":[{"C":[[1.5]],"A":[[0]],"b":[0]}],"cls":[1]}"#;
        assert!(matches!(GnnModel::from_json(text), Err(GnnError::NonInteger { .. })));
    }
}
