//! Satisfiability, validity and unsatisfiability of formulas.
//!
//! The decision procedure is a depth-bounded tableau: a world is searched
//! for a propositionally consistent choice of its subformulas, and the
//! counting atoms left over become an integer program whose variables are
//! the numbers of successors of each type. Types are realized lazily by the
//! same procedure one level down. Witnesses are returned as graphs in which
//! copies of the same successor type share their own successors.

mod ilp;
mod tableau;
mod terms;

use std::time::{Duration, Instant};

use crate::formula::FormulaDag;
use crate::graph::{LabeledGraph, PointedGraph};
use crate::reductions::reduce;
use crate::semantics::check;

pub use ilp::{ilp_feasible, ilp_feasible_with, Exhausted, IlpProblem, IlpRow, Rel};
pub use tableau::SatStats;

use tableau::{materialize, Tableau};
use terms::Terms;

/// Resource limits for one decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Branch points across the whole search.
    pub max_branches: u64,
    /// Wall-clock limit; `None` for no limit.
    pub time_limit: Option<Duration>,
    /// Largest successor-type space `2^|Φ|` explored at one world.
    pub max_types: usize,
    /// Largest witness graph that will be built.
    pub max_witness_vertices: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_branches: 1_000_000,
            time_limit: Some(Duration::from_secs(30)),
            max_types: 1 << 16,
            max_witness_vertices: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    /// Search the formula as given; indicators are decided at their world.
    #[default]
    Direct,
    /// Reduce to a tree without indicators and normalized atoms first, then
    /// map the witness back.
    Reductions,
}

#[derive(Clone, Debug, Default)]
pub struct SatOptions {
    pub budget: Budget,
    pub strategy: Strategy,
    /// Record one log line per world and integer program.
    pub verbose: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatOutcome {
    /// A model; the point satisfies the input formula.
    Sat(PointedGraph),
    Unsat,
    ResourceExhausted(String),
}

impl SatOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatOutcome::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SatOutcome::Unsat)
    }
}

#[derive(Clone, Debug)]
pub struct SatReport {
    pub outcome: SatOutcome,
    pub stats: SatStats,
}

/// Satisfiability of the root of `dag` with the default strategy.
pub fn satisfiable(dag: &FormulaDag, budget: &Budget) -> SatOutcome {
    let opts = SatOptions { budget: budget.clone(), ..SatOptions::default() };
    satisfiable_with(dag, &opts).outcome
}

/// The tableau alone, on the formula as given.
pub fn tableau(dag: &FormulaDag, budget: &Budget) -> SatOutcome {
    satisfiable(dag, budget)
}

pub fn satisfiable_with(dag: &FormulaDag, opts: &SatOptions) -> SatReport {
    let deadline = opts.budget.time_limit.map(|d| Instant::now() + d);
    let (outcome, stats) = match opts.strategy {
        Strategy::Direct => search(dag, opts, deadline),
        Strategy::Reductions => {
            let red = reduce(dag);
            let (out, stats) = search(&red.output, opts, deadline);
            let out = match out {
                SatOutcome::Sat(pg) => {
                    let mut g = red.backward(&pg.graph);
                    for p in dag.propositions() {
                        g.add_prop(p);
                    }
                    let (g, _) = g.induced(&g.reachable_within(pg.point, usize::MAX));
                    SatOutcome::Sat(PointedGraph { graph: g, point: 0 })
                }
                other => other,
            };
            (out, stats)
        }
    };
    if let SatOutcome::Sat(pg) = &outcome {
        assert!(check(&pg.graph, pg.point, dag), "witness does not satisfy the input formula");
    }
    SatReport { outcome, stats }
}

fn search(dag: &FormulaDag, opts: &SatOptions, deadline: Option<Instant>) -> (SatOutcome, SatStats) {
    let mut ts = Terms::default();
    let root = ts.import(dag, dag.root());
    let b = &opts.budget;
    let mut tab = Tableau::new(&ts, b.max_branches, deadline, b.max_types, opts.verbose);
    let res = tab.world(&[(root, true)], 0);
    let stats = std::mem::take(&mut tab.stats);
    let outcome = match res {
        Err(Exhausted(why)) => SatOutcome::ResourceExhausted(why),
        Ok(None) => SatOutcome::Unsat,
        Ok(Some(w)) => match materialize(&w, &ts, dag.propositions(), b.max_witness_vertices) {
            Ok(graph) => SatOutcome::Sat(PointedGraph { graph, point: 0 }),
            Err(Exhausted(why)) => SatOutcome::ResourceExhausted(why),
        },
    };
    (outcome, stats)
}

/// Answer of a yes/no question decided through satisfiability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Holds,
    /// Does not hold; carries a model refuting it when one was built.
    Fails(Option<PointedGraph>),
    Indeterminate(String),
}

impl Decision {
    pub fn holds(&self) -> Option<bool> {
        match self {
            Decision::Holds => Some(true),
            Decision::Fails(_) => Some(false),
            Decision::Indeterminate(_) => None,
        }
    }
}

/// `φ` holds at every pointed graph; a failure carries a countermodel.
pub fn valid(dag: &FormulaDag, budget: &Budget) -> Decision {
    unsatisfiable(&negated(dag), budget)
}

/// `φ` has no model; a failure carries a model.
pub fn unsatisfiable(dag: &FormulaDag, budget: &Budget) -> Decision {
    match satisfiable(dag, budget) {
        SatOutcome::Unsat => Decision::Holds,
        SatOutcome::Sat(m) => Decision::Fails(Some(m)),
        SatOutcome::ResourceExhausted(why) => Decision::Indeterminate(why),
    }
}

pub(crate) fn negated(dag: &FormulaDag) -> FormulaDag {
    let mut d = dag.clone();
    let r = d.not(d.root());
    d.set_root(r);
    d
}

/// The depth of a witness: longest path from the point.
pub fn witness_depth(g: &LabeledGraph, point: usize) -> usize {
    let mut depth = 0;
    let mut seen = g.reachable_within(point, 0);
    loop {
        let next = g.reachable_within(point, depth + 1);
        if next == seen || depth > g.num_vertices() {
            return depth;
        }
        seen = next;
        depth += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn sat(src: &str) -> SatOutcome {
        satisfiable(&parse(src).unwrap(), &Budget::default())
    }

    fn both(src: &str) -> (SatOutcome, SatOutcome) {
        let d = parse(src).unwrap();
        let direct = satisfiable(&d, &Budget::default());
        let opts = SatOptions { strategy: Strategy::Reductions, ..SatOptions::default() };
        (direct, satisfiable_with(&d, &opts).outcome)
    }

    #[test]
    fn propositional_contradiction() {
        assert_eq!(sat("p & !p"), SatOutcome::Unsat);
    }

    #[test]
    fn few_tubas_is_satisfiable() {
        let SatOutcome::Sat(pg) = sat("(#musician >= 1) & (#true >= 3 * #tubaplayer)") else { panic!() };
        let g = &pg.graph;
        assert!(g.successors(pg.point).iter().any(|v| g.has_label(*v, "musician")));
    }

    #[test]
    fn contradictory_counting_rows() {
        assert_eq!(sat("(#p >= #q + 1) & (#q >= #p + 1)"), SatOutcome::Unsat);
        assert_eq!(sat("(#p >= 3) & (#!p <= 0) & (#true <= 2)"), SatOutcome::Unsat);
    }

    #[test]
    fn single_count_has_one_successor() {
        let SatOutcome::Sat(pg) = sat("#p >= 1") else { panic!() };
        assert_eq!(pg.graph.num_vertices(), 2);
        assert_eq!(pg.graph.successors(0), &[1]);
        assert!(pg.graph.has_label(1, "p"));
    }

    #[test]
    fn beyond_first_order_atom() {
        assert!(sat("#p >= #q").is_sat());
        assert!(sat("#p >= #q + 1 & #(p & !q) >= 1").is_sat());
        assert_eq!(sat("#p >= #q + 1 & #(p & q) >= #p"), SatOutcome::Unsat);
        assert_eq!(sat("#p >= #q + 1 & #(!p | q) >= #true"), SatOutcome::Unsat);
    }

    #[test]
    fn indicators_are_decided_locally() {
        assert!(sat("[p] + [q] >= 2 & #p <= 0").is_sat());
        assert_eq!(sat("[p] >= 1 & !p"), SatOutcome::Unsat);
        assert_eq!(sat("[#q >= 1] >= 1 & #true <= 0"), SatOutcome::Unsat);
    }

    #[test]
    fn nested_modalities() {
        assert!(sat("#(#p >= 2) >= 2 & #(#!p >= 1) <= 0").is_sat());
        assert_eq!(sat("#(#p >= 2 & #true <= 1) >= 1"), SatOutcome::Unsat);
    }

    #[test]
    fn strategies_agree() {
        for src in [
            "p & !p",
            "#p >= 1",
            "[q] >= 1 & #q <= 0",
            "([#true <= 0] >= 1) & ([q] >= 1)",
            "def a := p & q; a | (#a <= [a])",
            "(#p >= #q + 1) & (#q >= #p + 1)",
            "#([p] + #p >= 2) >= 1 & [](#p <= 0)",
        ] {
            let (a, b) = both(src);
            assert_eq!(a.is_sat(), b.is_sat(), "{src}");
            assert_eq!(a.is_unsat(), b.is_unsat(), "{src}");
        }
    }

    #[test]
    fn validity() {
        let b = Budget::default();
        assert_eq!(valid(&parse("p | !p").unwrap(), &b), Decision::Holds);
        assert_eq!(valid(&parse("[]p <-> (#!p <= 0)").unwrap(), &b), Decision::Holds);
        assert!(matches!(valid(&parse("#p >= 1").unwrap(), &b), Decision::Fails(Some(_))));
        let tubas = parse("(#musician >= 1) & (#true >= 3 * #tubaplayer)").unwrap();
        assert!(matches!(unsatisfiable(&tubas, &b), Decision::Fails(Some(_))));
    }

    #[test]
    fn exhaustion_is_reported() {
        let b = Budget { max_branches: 3, ..Budget::default() };
        let d = parse("(a | b) & (c | d) & (e | f) & (g | h)").unwrap();
        assert!(matches!(satisfiable(&d, &b), SatOutcome::ResourceExhausted(_)));
        let b = Budget { max_types: 4, ..Budget::default() };
        assert!(matches!(
            satisfiable(&parse("#p + #q + #r >= 1").unwrap(), &b),
            SatOutcome::ResourceExhausted(_)
        ));
    }

    #[test]
    fn deterministic() {
        let d = parse("#(p | #q >= 2) >= 3 & #(!p & q) >= 1").unwrap();
        let a = satisfiable(&d, &Budget::default());
        let b = satisfiable(&d, &Budget::default());
        assert_eq!(a, b);
    }
}
