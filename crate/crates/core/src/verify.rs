//! The four GNN verification questions, decided through the formula
//! `tr(A)` equivalent to the GNN:
//!
//! * P1 `[[A]] = [[φ]]`: `tr(A) ↔ φ` is valid,
//! * P2 `[[A]] ⊆ [[φ]]`: `tr(A) → φ` is valid,
//! * P3 `[[φ]] ⊆ [[A]]`: `φ → tr(A)` is valid,
//! * P4 `[[φ]] ∩ [[A]] ≠ ∅`: `φ ∧ tr(A)` is satisfiable.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::formula::{FormulaDag, Importer};
use crate::gnn::GnnModel;
use crate::graph::PointedGraph;
use crate::sat::{satisfiable_with, SatOptions, SatOutcome, SatStats};
use crate::semantics::check;
use crate::transpile::gnn_to_logic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TaskKind {
    P1,
    P2,
    P3,
    P4,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [TaskKind::P1, TaskKind::P2, TaskKind::P3, TaskKind::P4];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::P1 => "p1",
            TaskKind::P2 => "p2",
            TaskKind::P3 => "p3",
            TaskKind::P4 => "p4",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(TaskKind::P1),
            "p2" => Ok(TaskKind::P2),
            "p3" => Ok(TaskKind::P3),
            "p4" => Ok(TaskKind::P4),
            _ => Err(format!("unknown task `{s}` (expected p1, p2, p3 or p4)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Answer {
    Holds,
    Fails,
    Indeterminate,
}

impl Answer {
    pub fn name(self) -> &'static str {
        match self {
            Answer::Holds => "holds",
            Answer::Fails => "fails",
            Answer::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub task: TaskKind,
    pub answer: Answer,
    /// Counterexample when P1-P3 fail, witness when P4 holds.
    pub certificate: Option<PointedGraph>,
    /// Why the answer is indeterminate.
    pub reason: Option<String>,
    pub stats: SatStats,
    /// Node count of `tr(A)`.
    pub gnn_formula_size: usize,
}

impl Verdict {
    /// `{"task","answer","certificate","stats"}`; the certificate is a graph
    /// whose first vertex is the point.
    pub fn to_value(&self) -> Value {
        let mut stats = Map::new();
        stats.insert("branches".into(), json!(self.stats.branches));
        stats.insert("worlds".into(), json!(self.stats.worlds));
        stats.insert("memo_hits".into(), json!(self.stats.memo_hits));
        stats.insert("ilp_calls".into(), json!(self.stats.ilp_calls));
        stats.insert("gnn_formula_size".into(), json!(self.gnn_formula_size));
        if let Some(c) = &self.certificate {
            stats.insert("point".into(), json!(c.graph.vertex_id(c.point)));
        }
        if let Some(r) = &self.reason {
            stats.insert("reason".into(), json!(r));
        }
        let mut out = Map::new();
        out.insert("task".into(), json!(self.task.name()));
        out.insert("answer".into(), json!(self.answer.name()));
        out.insert("certificate".into(), self.certificate.as_ref().map_or(Value::Null, |c| c.graph.to_value()));
        out.insert("stats".into(), Value::Object(stats));
        Value::Object(out)
    }
}

/// The question's formula: valid for P1-P3, satisfiable for P4, together
/// with `tr(A)` and `φ` roots inside it.
pub fn task_formula(kind: TaskKind, gnn: &GnnModel, phi: &FormulaDag) -> (FormulaDag, usize) {
    let tr = gnn_to_logic(gnn);
    let tr_size = tr.size_of(tr.root());
    let mut d = FormulaDag::new();
    let a = Importer::new(&tr, true).formula(&mut d, tr.root());
    let f = Importer::new(phi, true).formula(&mut d, phi.root());
    let root = match kind {
        TaskKind::P1 => d.iff(a, f),
        TaskKind::P2 => d.implies(a, f),
        TaskKind::P3 => d.implies(f, a),
        TaskKind::P4 => d.and(f, a),
    };
    d.set_root(root);
    (d, tr_size)
}

pub fn verify(kind: TaskKind, gnn: &GnnModel, phi: &FormulaDag, opts: &SatOptions) -> Verdict {
    let (q, gnn_formula_size) = task_formula(kind, gnn, phi);
    let query = if kind == TaskKind::P4 { q } else { crate::sat::negated(&q) };
    let report = satisfiable_with(&query, opts);
    let (answer, certificate, reason) = match report.outcome {
        SatOutcome::Sat(m) => {
            let ans = if kind == TaskKind::P4 { Answer::Holds } else { Answer::Fails };
            (ans, Some(m), None)
        }
        SatOutcome::Unsat => {
            let ans = if kind == TaskKind::P4 { Answer::Fails } else { Answer::Holds };
            (ans, None, None)
        }
        SatOutcome::ResourceExhausted(why) => (Answer::Indeterminate, None, Some(why)),
    };
    if let Some(c) = &certificate {
        recheck(kind, gnn, phi, c);
    }
    Verdict { task: kind, answer, certificate, reason, stats: report.stats, gnn_formula_size }
}

/// Confirms a certificate with the classifier and the model checker.
fn recheck(kind: TaskKind, gnn: &GnnModel, phi: &FormulaDag, c: &PointedGraph) {
    let a = gnn.classify(&c.graph)[c.point];
    let f = check(&c.graph, c.point, phi);
    let ok = match kind {
        TaskKind::P1 => a != f,
        TaskKind::P2 => a && !f,
        TaskKind::P3 => f && !a,
        TaskKind::P4 => a && f,
    };
    assert!(ok, "certificate for {kind} fails the re-check (gnn {a}, formula {f})");
}
