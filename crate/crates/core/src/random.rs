//! Seeded generators for formulas, GNNs and graphs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{ExprId, FormulaDag, NodeId};
use crate::gnn::{GnnLayer, GnnModel, IntMatrix};
use crate::Int;

pub use crate::graph::{random_graph, random_graph_with};

/// Shape of random formulas. Nodes are created bottom-up and later nodes
/// pick their children from everything built so far, so subformulas are
/// shared.
#[derive(Clone, Debug)]
pub struct FormulaGen {
    pub props: Vec<String>,
    /// Upper bound on the root's node count (formula plus expression nodes).
    pub max_nodes: usize,
    pub max_depth: usize,
    /// Probability that an atom term is an indicator `1_φ` rather than `#φ`.
    pub one_prob: f64,
    /// Coefficients and constants are drawn from `-max_coeff..=max_coeff`.
    pub max_coeff: i64,
}

impl FormulaGen {
    pub fn new<S: AsRef<str>>(props: &[S]) -> Self {
        FormulaGen {
            props: props.iter().map(|p| p.as_ref().to_string()).collect(),
            max_nodes: 25,
            max_depth: 2,
            one_prob: 0.3,
            max_coeff: 3,
        }
    }

    pub fn with_max_nodes(mut self, n: usize) -> Self {
        self.max_nodes = n;
        self
    }

    pub fn with_max_depth(mut self, d: usize) -> Self {
        self.max_depth = d;
        self
    }

    pub fn with_one_prob(mut self, p: f64) -> Self {
        self.one_prob = p;
        self
    }

    pub fn generate_seeded(&self, seed: u64) -> FormulaDag {
        self.generate(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// A formula whose root has at most `max_nodes` nodes and modal depth
    /// at most `max_depth`.
    pub fn generate<R: Rng>(&self, rng: &mut R) -> FormulaDag {
        assert!(!self.props.is_empty(), "need at least one proposition");
        assert!(self.max_nodes >= 1);
        loop {
            let target = rng.gen_range(1..=self.max_nodes);
            let mut d = FormulaDag::new();
            let mut pool: Vec<(NodeId, usize)> = Vec::new();
            let mut last = None;
            for _ in 0..target {
                let n = self.step(rng, &mut d, &pool);
                let md = d.modal_depth(n);
                pool.push((n, md));
                last = Some(n);
            }
            let root = last.unwrap();
            d.set_root(root);
            if d.size_of(root) <= self.max_nodes {
                return compact(&d);
            }
        }
    }

    fn step<R: Rng>(&self, rng: &mut R, d: &mut FormulaDag, pool: &[(NodeId, usize)]) -> NodeId {
        if pool.is_empty() {
            return d.prop(self.props.choose(rng).unwrap());
        }
        match rng.gen_range(0..10) {
            0 | 1 => d.prop(self.props.choose(rng).unwrap()),
            2 | 3 => {
                let a = pick(rng, pool);
                d.not(a.0)
            }
            4..=6 => {
                let a = pick(rng, pool);
                let b = pick(rng, pool);
                d.or(a.0, b.0)
            }
            _ => {
                let terms = rng.gen_range(1..=2);
                let mut e: Option<ExprId> = None;
                for _ in 0..terms {
                    let (f, md) = pick(rng, pool);
                    let t = if md >= self.max_depth || rng.gen_bool(self.one_prob) { d.one(f) } else { d.count(f) };
                    let k = self.coeff(rng);
                    let t = if k == 1 { t } else { d.scale(k, t) };
                    e = Some(match e {
                        None => t,
                        Some(prev) => d.add(prev, t),
                    });
                }
                let c = rng.gen_range(-self.max_coeff..=self.max_coeff);
                let e = e.unwrap();
                let e = if c == 0 {
                    e
                } else {
                    let c = d.constant(c);
                    d.add(e, c)
                };
                d.geq_zero(e)
            }
        }
    }

    fn coeff<R: Rng>(&self, rng: &mut R) -> i64 {
        loop {
            let k = rng.gen_range(-self.max_coeff..=self.max_coeff);
            if k != 0 {
                return k;
            }
        }
    }
}

/// Prefers recently built nodes so formulas get deep.
fn pick<R: Rng>(rng: &mut R, pool: &[(NodeId, usize)]) -> (NodeId, usize) {
    let n = pool.len();
    let lo = n.saturating_sub(6);
    let i = if rng.gen_bool(0.7) { rng.gen_range(lo..n) } else { rng.gen_range(0..n) };
    pool[i]
}

/// A copy holding only the nodes reachable from the root.
pub fn compact(d: &FormulaDag) -> FormulaDag {
    let mut out = FormulaDag::new();
    let r = crate::formula::Importer::new(d, true).formula(&mut out, d.root());
    out.set_root(r);
    out
}

/// Shape of random GNNs.
#[derive(Clone, Debug)]
pub struct GnnGen {
    pub props: Vec<String>,
    pub max_layers: usize,
    pub max_dim: usize,
    /// Entries are drawn from `-max_coeff..=max_coeff`.
    pub max_coeff: i64,
    /// Probability that a matrix entry is nonzero.
    pub density: f64,
}

impl GnnGen {
    pub fn new<S: AsRef<str>>(props: &[S]) -> Self {
        GnnGen {
            props: props.iter().map(|p| p.as_ref().to_string()).collect(),
            max_layers: 3,
            max_dim: 5,
            max_coeff: 5,
            density: 0.5,
        }
    }

    pub fn generate_seeded(&self, seed: u64) -> GnnModel {
        self.generate(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn generate<R: Rng>(&self, rng: &mut R) -> GnnModel {
        let layers = rng.gen_range(1..=self.max_layers.max(1));
        let mut dim = self.props.len();
        let mut out = Vec::with_capacity(layers);
        for _ in 0..layers {
            let next = rng.gen_range(1..=self.max_dim.max(1));
            out.push(self.layer(rng, dim, next));
            dim = next;
        }
        let cls = (0..dim).map(|_| Int::from(rng.gen_range(-self.max_coeff..=self.max_coeff))).collect();
        GnnModel::from_layers(self.props.clone(), out, cls).expect("generated shapes chain")
    }

    /// One layer with the given shape.
    pub fn layer<R: Rng>(&self, rng: &mut R, rows: usize, cols: usize) -> GnnLayer {
        let mut c = IntMatrix::zeros(rows, cols);
        let mut a = IntMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if rng.gen_bool(self.density) {
                    c.add(i, j, rng.gen_range(-self.max_coeff..=self.max_coeff));
                }
                if rng.gen_bool(self.density) {
                    a.add(i, j, rng.gen_range(-self.max_coeff..=self.max_coeff));
                }
            }
        }
        let b = (0..cols).map(|_| Int::from(rng.gen_range(-self.max_coeff..=self.max_coeff))).collect();
        GnnLayer::new(c, a, b)
    }
}
