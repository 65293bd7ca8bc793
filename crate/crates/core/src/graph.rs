//! Finite labeled directed graphs.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid graph JSON: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge `{0}` -> `{1}`")]
    DuplicateEdge(String, String),
    #[error("edge endpoint `{0}` is not a vertex")]
    DanglingEndpoint(String),
    #[error("label `{label}` of vertex `{vertex}` is not in the proposition table")]
    UnknownLabel { vertex: String, label: String },
    #[error("duplicate proposition `{0}`")]
    DuplicateProposition(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// A graph `(V, E, ℓ)` with string vertex ids and a proposition table.
/// Internally vertices are dense indices in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    props: Vec<String>,
    prop_index: HashMap<String, usize>,
    ids: Vec<String>,
    id_index: HashMap<String, usize>,
    labels: Vec<Vec<bool>>,
    succ: Vec<Vec<usize>>,
    edge_set: HashSet<(usize, usize)>,
}

/// A graph together with a distinguished vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedGraph {
    pub graph: LabeledGraph,
    pub point: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    propositions: Vec<String>,
    vertices: Vec<VertexJson>,
    edges: Vec<(String, String)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexJson {
    id: String,
    labels: Vec<String>,
}

impl LabeledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_props<S: AsRef<str>>(props: &[S]) -> Self {
        let mut g = Self::new();
        for p in props {
            g.add_prop(p.as_ref());
        }
        g
    }

    /// Index of proposition `name`, adding it to the table if needed.
    pub fn add_prop(&mut self, name: &str) -> usize {
        if let Some(i) = self.prop_index.get(name) {
            return *i;
        }
        let i = self.props.len();
        self.props.push(name.to_string());
        self.prop_index.insert(name.to_string(), i);
        for l in &mut self.labels {
            l.push(false);
        }
        i
    }

    /// Adds a vertex labeled with the given propositions (added to the table
    /// if missing). Panics on a duplicate id.
    pub fn add_vertex<S: AsRef<str>>(&mut self, id: &str, labels: &[S]) -> usize {
        assert!(!self.id_index.contains_key(id), "duplicate vertex id {id}");
        let idx: Vec<usize> = labels.iter().map(|l| self.add_prop(l.as_ref())).collect();
        let v = self.ids.len();
        self.ids.push(id.to_string());
        self.id_index.insert(id.to_string(), v);
        let mut row = vec![false; self.props.len()];
        for i in idx {
            row[i] = true;
        }
        self.labels.push(row);
        self.succ.push(Vec::new());
        v
    }

    /// Adds the edge `u -> v`; returns false if it was already present.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        assert!(u < self.ids.len() && v < self.ids.len(), "edge endpoint out of range");
        if !self.edge_set.insert((u, v)) {
            return false;
        }
        self.succ[u].push(v);
        true
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        if !self.edge_set.remove(&(u, v)) {
            return false;
        }
        self.succ[u].retain(|w| *w != v);
        true
    }

    pub fn set_label(&mut self, v: usize, prop: &str, value: bool) {
        let p = self.add_prop(prop);
        self.labels[v][p] = value;
    }

    pub fn propositions(&self) -> &[String] {
        &self.props
    }

    pub fn prop_index(&self, name: &str) -> Option<usize> {
        self.prop_index.get(name).copied()
    }

    pub fn num_vertices(&self) -> usize {
        self.ids.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_set.len()
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.id_index.get(id).copied()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_set.contains(&(u, v))
    }

    /// Edges grouped by source vertex, each group in insertion order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ.iter().enumerate().flat_map(|(u, vs)| vs.iter().map(move |v| (u, *v)))
    }

    /// Truth of proposition index `p` at `v`.
    pub fn label(&self, v: usize, p: usize) -> bool {
        self.labels[v][p]
    }

    /// Truth of proposition `name` at `v`; unknown propositions are false.
    pub fn has_label(&self, v: usize, name: &str) -> bool {
        self.prop_index(name).is_some_and(|p| self.labels[v][p])
    }

    pub fn labels_of(&self, v: usize) -> Vec<&str> {
        (0..self.props.len())
            .filter(|p| self.labels[v][*p])
            .map(|p| self.props[p].as_str())
            .collect()
    }

    pub fn pointed(self, id: &str) -> Result<PointedGraph, GraphError> {
        let point = self.vertex_index(id).ok_or_else(|| GraphError::UnknownVertex(id.to_string()))?;
        Ok(PointedGraph { graph: self, point })
    }

    /// Parses the graph JSON format.
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let raw: GraphJson = serde_json::from_str(text)?;
        Self::from_raw(raw)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self, GraphError> {
        let raw: GraphJson = serde_json::from_value(value)?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: GraphJson) -> Result<Self, GraphError> {
        let mut g = LabeledGraph::new();
        for p in &raw.propositions {
            if g.prop_index.contains_key(p) {
                return Err(GraphError::DuplicateProposition(p.clone()));
            }
            g.add_prop(p);
        }
        for v in &raw.vertices {
            if g.id_index.contains_key(&v.id) {
                return Err(GraphError::DuplicateVertex(v.id.clone()));
            }
            if let Some(l) = v.labels.iter().find(|l| !g.prop_index.contains_key(*l)) {
                return Err(GraphError::UnknownLabel { vertex: v.id.clone(), label: l.clone() });
            }
            g.add_vertex(&v.id, &v.labels);
        }
        for (a, b) in &raw.edges {
            let u = g.vertex_index(a).ok_or_else(|| GraphError::DanglingEndpoint(a.clone()))?;
            let v = g.vertex_index(b).ok_or_else(|| GraphError::DanglingEndpoint(b.clone()))?;
            if !g.add_edge(u, v) {
                return Err(GraphError::DuplicateEdge(a.clone(), b.clone()));
            }
        }
        Ok(g)
    }

    pub fn to_value(&self) -> serde_json::Value {
        let raw = GraphJson {
            propositions: self.props.clone(),
            vertices: (0..self.num_vertices())
                .map(|v| VertexJson {
                    id: self.ids[v].clone(),
                    labels: self.labels_of(v).into_iter().map(String::from).collect(),
                })
                .collect(),
            edges: self.edges().map(|(u, v)| (self.ids[u].clone(), self.ids[v].clone())).collect(),
        };
        serde_json::to_value(raw).expect("graph serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("graph serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GraphError> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    /// Vertices reachable from `from` in at most `depth` steps.
    pub fn reachable_within(&self, from: usize, depth: usize) -> Vec<bool> {
        let mut seen = vec![false; self.num_vertices()];
        seen[from] = true;
        let mut frontier = vec![from];
        for _ in 0..depth {
            let mut next = Vec::new();
            for u in frontier {
                for &v in &self.succ[u] {
                    if !seen[v] {
                        seen[v] = true;
                        next.push(v);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        seen
    }

    /// The subgraph induced by the vertices with `keep[v]`, in original order.
    /// Returns the new graph and the old-to-new index map.
    pub fn induced(&self, keep: &[bool]) -> (LabeledGraph, Vec<Option<usize>>) {
        let mut g = LabeledGraph::with_props(&self.props);
        let mut map = vec![None; self.num_vertices()];
        for v in 0..self.num_vertices() {
            if keep[v] {
                map[v] = Some(g.add_vertex(&self.ids[v], &self.labels_of(v)));
            }
        }
        for (u, v) in self.edges() {
            if let (Some(a), Some(b)) = (map[u], map[v]) {
                g.add_edge(a, b);
            }
        }
        (g, map)
    }
}

/// A random graph on `n` vertices named `v0..`, each edge (self-loops
/// included) present with probability `edge_prob`, each label with
/// probability 1/2.
pub fn random_graph<S: AsRef<str>>(n: usize, props: &[S], edge_prob: f64, seed: u64) -> LabeledGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_graph_with(&mut rng, n, props, edge_prob)
}

pub fn random_graph_with<R: Rng, S: AsRef<str>>(
    rng: &mut R,
    n: usize,
    props: &[S],
    edge_prob: f64,
) -> LabeledGraph {
    assert!((0.0..=1.0).contains(&edge_prob), "edge probability out of range");
    let mut g = LabeledGraph::with_props(props);
    for v in 0..n {
        let labels: Vec<&str> = props.iter().map(|p| p.as_ref()).filter(|_| rng.gen_bool(0.5)).collect();
        g.add_vertex(&format!("v{v}"), &labels);
    }
    for u in 0..n {
        for v in 0..n {
            if rng.gen_bool(edge_prob) {
                g.add_edge(u, v);
            }
        }
    }
    g
}
