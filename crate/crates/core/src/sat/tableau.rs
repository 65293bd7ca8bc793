//! World-by-world search. At each world the goals are saturated
//! propositionally (branching on disjunctions and on the truth of indicator
//! arguments); the counting atoms that remain become an integer program over
//! successor types, and each type used by a solution is realized by a
//! recursive call one level down.

use std::collections::HashMap;
use std::rc::Rc;
use std::time::Instant;

use num_traits::{Signed, ToPrimitive, Zero};

use super::ilp::{ilp_feasible_with, Exhausted, IlpProblem, Rel};
use super::terms::{Term, Terms, T};
use crate::graph::LabeledGraph;
use crate::Int;

/// A tree-shaped model description. Children are `(type witness, multiplicity)`.
#[derive(Debug)]
pub(crate) struct Witness {
    pub labels: Vec<u32>,
    pub children: Vec<(Rc<Witness>, Int)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SatStats {
    /// Branch points (disjunctions, indicator decisions, ILP nodes).
    pub branches: u64,
    pub worlds: u64,
    pub memo_hits: u64,
    pub ilp_calls: u64,
    pub log: Vec<String>,
}

pub(crate) struct Tableau<'a> {
    ts: &'a Terms,
    max_branches: u64,
    deadline: Option<Instant>,
    max_types: usize,
    verbose: bool,
    memo: HashMap<Vec<(T, bool)>, Option<Rc<Witness>>>,
    pub stats: SatStats,
}

impl<'a> Tableau<'a> {
    pub fn new(ts: &'a Terms, max_branches: u64, deadline: Option<Instant>, max_types: usize, verbose: bool) -> Self {
        Tableau { ts, max_branches, deadline, max_types, verbose, memo: HashMap::new(), stats: SatStats::default() }
    }

    fn tick(&mut self) -> Result<(), Exhausted> {
        self.stats.branches += 1;
        if self.stats.branches > self.max_branches {
            return Err(Exhausted(format!("branch limit {} reached", self.max_branches)));
        }
        if self.stats.branches.is_multiple_of(64) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    return Err(Exhausted("time limit reached".into()));
                }
            }
        }
        Ok(())
    }

    fn log(&mut self, depth: usize, msg: impl FnOnce() -> String) {
        if self.verbose {
            let line = format!("{}{}", "  ".repeat(depth), msg());
            self.stats.log.push(line);
        }
    }

    /// A witness for the conjunction of the goals, or `None` if there is none.
    pub fn world(&mut self, goals: &[(T, bool)], depth: usize) -> Result<Option<Rc<Witness>>, Exhausted> {
        let Some(key) = self.canonical(goals) else { return Ok(None) };
        if let Some(w) = self.memo.get(&key) {
            self.stats.memo_hits += 1;
            return Ok(w.clone());
        }
        self.stats.worlds += 1;
        self.log(depth, || format!("world with {} goals", key.len()));
        let mut local = Local::default();
        let mut ok = true;
        for (t, v) in &key {
            ok = ok && local.assign(*t, *v);
        }
        let res = if ok && local.propagate(self.ts) { self.search(local, depth)? } else { None };
        self.log(depth, || format!("world {}", if res.is_some() { "sat" } else { "unsat" }));
        self.memo.insert(key, res.clone());
        Ok(res)
    }

    /// Strips negations, sorts and dedups; `None` on a direct contradiction.
    fn canonical(&self, goals: &[(T, bool)]) -> Option<Vec<(T, bool)>> {
        let mut out: Vec<(T, bool)> = goals
            .iter()
            .map(|(t, v)| {
                let (mut t, mut v) = (*t, *v);
                while let Term::Not(a) = self.ts.get(t) {
                    t = *a;
                    v = !v;
                }
                (t, v)
            })
            .collect();
        out.sort();
        out.dedup();
        if out.windows(2).any(|w| w[0].0 == w[1].0) {
            return None;
        }
        Some(out)
    }

    fn search(&mut self, mut local: Local, depth: usize) -> Result<Option<Rc<Witness>>, Exhausted> {
        match local.settle(self.ts) {
            Step::Clash => Ok(None),
            Step::Complete => self.complete(&local, depth),
            Step::Split(a, b) => {
                self.tick()?;
                let mut left = local.clone();
                if left.assign(a, true) && left.propagate(self.ts) {
                    if let Some(w) = self.search(left, depth)? {
                        return Ok(Some(w));
                    }
                }
                if local.assign(a, false) && b.is_none_or(|b| local.assign(b, true)) && local.propagate(self.ts) {
                    return self.search(local, depth);
                }
                Ok(None)
            }
        }
    }

    fn complete(&mut self, local: &Local, depth: usize) -> Result<Option<Rc<Witness>>, Exhausted> {
        let ts = self.ts;
        let mut labels: Vec<u32> = local
            .val
            .iter()
            .filter_map(|(t, v)| match ts.get(*t) {
                Term::Prop(p) if *v => Some(*p),
                _ => None,
            })
            .collect();
        labels.sort_unstable();

        // Counting constraints `Σ c_i #φ_i ▷ b`.
        let mut atoms = local.atoms.clone();
        atoms.sort_unstable();
        atoms.dedup();
        let mut cons: Vec<(&[(T, Int)], Rel, Int)> = Vec::new();
        for t in atoms {
            let Term::Atom { ones, counts, constant } = ts.get(t) else { unreachable!() };
            let mut c = constant.clone();
            for (f, k) in ones {
                if local.val[f] {
                    c += k;
                }
            }
            let v = local.val[&t];
            if counts.is_empty() {
                if (!c.is_negative()) != v {
                    return Ok(None);
                }
                continue;
            }
            if v {
                cons.push((counts, Rel::Ge, -c));
            } else {
                cons.push((counts, Rel::Le, -c - 1));
            }
        }
        if cons.is_empty() {
            return Ok(Some(Rc::new(Witness { labels, children: Vec::new() })));
        }

        let mut phi: Vec<T> = cons.iter().flat_map(|(cs, _, _)| cs.iter().map(|(f, _)| *f)).collect();
        phi.sort_unstable();
        phi.dedup();
        let k = phi.len();
        if k >= usize::BITS as usize - 1 || (1usize << k) > self.max_types {
            return Err(Exhausted(format!(
                "{k} counted formulas at one world exceed the type limit {}",
                self.max_types
            )));
        }
        let pos: HashMap<T, usize> = phi.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        let coeff: Vec<Vec<Int>> = cons
            .iter()
            .map(|(cs, _, _)| {
                let mut row = vec![Int::zero(); k];
                for (f, c) in cs.iter() {
                    row[pos[f]] += c;
                }
                row
            })
            .collect();

        // Successor types grouped by their column, fewest true formulas first.
        let mut masks: Vec<u64> = (0..1u64 << k).collect();
        masks.sort_by_key(|m| (m.count_ones(), *m));
        let mut groups: Vec<Group> = Vec::new();
        let mut by_col: HashMap<Vec<Int>, usize> = HashMap::new();
        for mask in masks {
            let col: Vec<Int> = coeff
                .iter()
                .map(|row| (0..k).filter(|i| mask >> i & 1 == 1).map(|i| &row[i]).sum())
                .collect();
            if col.iter().all(|c| c.is_zero()) {
                continue;
            }
            match by_col.get(&col) {
                Some(g) => groups[*g].cands.push(mask),
                None => {
                    by_col.insert(col.clone(), groups.len());
                    groups.push(Group { col, cands: vec![mask], next: 0, active: true, chosen: None });
                }
            }
        }

        loop {
            let active: Vec<usize> = (0..groups.len()).filter(|g| groups[*g].active).collect();
            let mut p = IlpProblem::new(active.len());
            for (r, (_, rel, b)) in cons.iter().enumerate() {
                p.push(active.iter().map(|g| groups[*g].col[r].clone()).collect(), *rel, b.clone());
            }
            self.stats.ilp_calls += 1;
            self.log(depth, || format!("ilp: {} rows, {} columns", p.rows.len(), p.num_vars));
            let sol = ilp_feasible_with(&p, &mut || self.tick())?;
            let Some(x) = sol else { return Ok(None) };
            let mut retry = false;
            for (xi, g) in x.iter().zip(&active) {
                if xi.is_zero() {
                    continue;
                }
                while groups[*g].chosen.is_none() {
                    let grp = &groups[*g];
                    let Some(&mask) = grp.cands.get(grp.next) else { break };
                    let goals: Vec<(T, bool)> = phi.iter().enumerate().map(|(i, f)| (*f, mask >> i & 1 == 1)).collect();
                    match self.world(&goals, depth + 1)? {
                        Some(w) => groups[*g].chosen = Some(w),
                        None => groups[*g].next += 1,
                    }
                }
                if groups[*g].chosen.is_none() {
                    groups[*g].active = false;
                    retry = true;
                    break;
                }
            }
            if !retry {
                let children = x
                    .into_iter()
                    .zip(&active)
                    .filter(|(xi, _)| !xi.is_zero())
                    .map(|(xi, g)| (groups[*g].chosen.clone().unwrap(), xi))
                    .collect();
                return Ok(Some(Rc::new(Witness { labels, children })));
            }
        }
    }
}

struct Group {
    col: Vec<Int>,
    cands: Vec<u64>,
    next: usize,
    active: bool,
    chosen: Option<Rc<Witness>>,
}

enum Step {
    Clash,
    Complete,
    /// Try `a`; otherwise `¬a` and, for a disjunction, `b`.
    Split(T, Option<T>),
}

#[derive(Clone, Default)]
struct Local {
    val: HashMap<T, bool>,
    queue: Vec<T>,
    disj: Vec<T>,
    undecided: Vec<T>,
    atoms: Vec<T>,
}

impl Local {
    fn assign(&mut self, t: T, v: bool) -> bool {
        match self.val.get(&t) {
            Some(x) => *x == v,
            None => {
                self.val.insert(t, v);
                self.queue.push(t);
                true
            }
        }
    }

    fn propagate(&mut self, ts: &Terms) -> bool {
        while let Some(t) = self.queue.pop() {
            let v = self.val[&t];
            match ts.get(t) {
                Term::Prop(_) => {}
                Term::Not(a) => {
                    if !self.assign(*a, !v) {
                        return false;
                    }
                }
                Term::Or(a, b) => {
                    if v {
                        self.disj.push(t);
                    } else if !(self.assign(*a, false) && self.assign(*b, false)) {
                        return false;
                    }
                }
                Term::Atom { ones, .. } => {
                    self.atoms.push(t);
                    self.undecided.extend(ones.iter().map(|(f, _)| *f));
                }
            }
        }
        true
    }

    /// Unit-propagates the open disjunctions to a fixpoint, then names the
    /// next branching point.
    fn settle(&mut self, ts: &Terms) -> Step {
        loop {
            let mut changed = false;
            let mut open = Vec::new();
            for &t in &self.disj.clone() {
                let Term::Or(a, b) = ts.get(t) else { unreachable!() };
                match (self.val.get(a).copied(), self.val.get(b).copied()) {
                    (Some(true), _) | (_, Some(true)) => {}
                    (Some(false), Some(false)) => return Step::Clash,
                    (Some(false), None) => {
                        self.assign(*b, true);
                        changed = true;
                    }
                    (None, Some(false)) => {
                        self.assign(*a, true);
                        changed = true;
                    }
                    (None, None) => open.push(t),
                }
            }
            self.disj = open;
            if changed {
                if !self.propagate(ts) {
                    return Step::Clash;
                }
                continue;
            }
            if let Some(&t) = self.disj.first() {
                let Term::Or(a, b) = ts.get(t) else { unreachable!() };
                return Step::Split(*a, Some(*b));
            }
            self.undecided.retain(|f| !self.val.contains_key(f));
            return match self.undecided.first() {
                Some(&f) => Step::Split(f, None),
                None => Step::Complete,
            };
        }
    }
}

/// Unfolds a witness into a graph; copies of a type share their successors.
/// The root is vertex 0. Fails if more than `max_vertices` vertices are needed.
pub(crate) fn materialize(
    root: &Rc<Witness>,
    ts: &Terms,
    props: &[String],
    max_vertices: usize,
) -> Result<LabeledGraph, Exhausted> {
    let mut g = LabeledGraph::with_props(props);
    for p in &ts.props {
        g.add_prop(p);
    }
    let names = |w: &Witness| -> Vec<&str> { w.labels.iter().map(|p| ts.props[*p as usize].as_str()).collect() };
    g.add_vertex("v0", &names(root));
    let mut memo: HashMap<*const Witness, Vec<usize>> = HashMap::new();
    let kids = successors(root, &mut g, &mut memo, &names, max_vertices)?;
    for s in kids {
        g.add_edge(0, s);
    }
    Ok(g)
}

fn successors<'t>(
    w: &Rc<Witness>,
    g: &mut LabeledGraph,
    memo: &mut HashMap<*const Witness, Vec<usize>>,
    names: &dyn Fn(&Witness) -> Vec<&'t str>,
    max_vertices: usize,
) -> Result<Vec<usize>, Exhausted> {
    if let Some(v) = memo.get(&Rc::as_ptr(w)) {
        return Ok(v.clone());
    }
    let mut out = Vec::new();
    for (c, k) in &w.children {
        let cs = successors(c, g, memo, names, max_vertices)?;
        let k = k.to_usize().filter(|k| g.num_vertices() + k <= max_vertices);
        let Some(k) = k else {
            return Err(Exhausted(format!("witness needs more than {max_vertices} vertices")));
        };
        for _ in 0..k {
            let id = format!("v{}", g.num_vertices());
            let v = g.add_vertex(&id, &names(c));
            for &s in &cs {
                g.add_edge(v, s);
            }
            out.push(v);
        }
    }
    memo.insert(Rc::as_ptr(w), out.clone());
    Ok(out)
}
