//! Counting modal logic K# and its correspondence with aggregate-combine GNNs.
//!
//! The crate is organised around a shared formula representation
//! ([`formula::FormulaDag`]) and a labeled graph model ([`graph::LabeledGraph`]):
//!
//! * [`semantics`] model-checks formulas at pointed graphs,
//! * [`gnn`] evaluates integer GNNs with truncated ReLU exactly,
//! * [`transpile`] translates formulas into GNNs and back,
//! * [`reductions`] implements the satisfiability-preserving rewriting chain
//!   (DAG to tree, indicator elimination, counting normal form),
//! * [`sat`] decides satisfiability with a tableau over an integer feasibility core,
//! * [`oracle`] is a brute-force bounded model finder used as ground truth,
//! * [`verify`] answers the four GNN verification questions (equivalence,
//!   inclusion both ways, non-empty intersection).

pub mod cli;
pub mod formula;
pub mod gnn;
pub mod graph;
pub mod oracle;
pub mod random;
pub mod reductions;
pub mod sat;
pub mod semantics;
pub mod transpile;
pub mod verify;

/// Integer type used for every coefficient and constant.
pub type Int = num_bigint::BigInt;

pub use formula::{ExprId, FormulaDag, LinearAtom, NodeId};
pub use gnn::{GnnLayer, GnnModel};
pub use graph::{LabeledGraph, PointedGraph};
pub use sat::{Budget, SatOutcome};
