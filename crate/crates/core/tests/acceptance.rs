//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use ksharp::cli::run_with;
use ksharp::formula::{is_isomorphic, parse, FormulaDag, Importer};
use ksharp::gnn::GnnModel;
use ksharp::graph::{random_graph, LabeledGraph, PointedGraph};
use ksharp::oracle::{find_model, SearchBound};
use ksharp::random::{FormulaGen, GnnGen};
use ksharp::reductions::{box_upto_tree, dag_to_tree, eliminate_ones, eml_normal_atoms};
use ksharp::sat::{satisfiable_with, SatOptions, SatOutcome, Strategy};
use ksharp::semantics::{check, models};
use ksharp::transpile::{gnn_to_logic, logic_to_gnn};
use ksharp::verify::{verify, Answer, TaskKind};
use ksharp::Int;

use common::{corpus, fixture, PROP_POOL};

const CORPUS_SIZE: usize = 300;
/// Additive constant in `|dag_to_tree(φ)| <= 2|φ|^3 + K`.
const TREE_K: u128 = 64;
/// Factor in `|□≤m φ| <= C·m·(m + |φ|)` for `m >= 1`.
const BOX_C: u128 = 8;

type Outcome = Result<String, String>;

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["ksharp"];
    argv.extend_from_slice(args);
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn int_rows(v: &Value) -> Vec<Vec<i64>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect())
        .collect()
}

fn ints(v: &Value) -> Vec<i64> {
    v.as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect()
}

/// Dense `rows × cols` matrix with the given 1-based entries.
fn dense(rows: usize, cols: usize, entries: &[(usize, usize, i64)]) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0; cols]; rows];
    for (i, j, v) in entries {
        m[i - 1][j - 1] = *v;
    }
    m
}

fn golden_to_gnn() -> Outcome {
    let path = fixture("negated_or.ks");
    let (code, out) = cli(&["to-gnn", path.to_str().unwrap()]);
    if code != 0 {
        return Err(format!("exit code {code}"));
    }
    let v: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    if v["propositions"] != serde_json::json!(["p", "q"]) {
        return Err(format!("propositions {}", v["propositions"]));
    }
    let c = dense(5, 5, &[(1, 1, 1), (2, 2, 1), (1, 4, 1), (3, 4, 1), (4, 5, -1)]);
    let a = dense(5, 5, &[(2, 3, 3)]);
    let b = vec![0, 0, -7, 0, 1];
    let layers = v["layers"].as_array().unwrap();
    if layers.len() != 5 {
        return Err(format!("{} layers", layers.len()));
    }
    for (i, l) in layers.iter().enumerate() {
        let (ec, ea) = if i == 0 { (c[..2].to_vec(), a[..2].to_vec()) } else { (c.clone(), a.clone()) };
        if int_rows(&l["C"]) != ec || int_rows(&l["A"]) != ea || ints(&l["b"]) != b {
            return Err(format!("layer {} differs: {l}", i + 1));
        }
    }
    if ints(&v["cls"]) != vec![0, 0, 0, 0, 1] {
        return Err(format!("cls {}", v["cls"]));
    }
    Ok("uniform layer C, A, b and cls x_5 >= 1 match exactly".into())
}

fn golden_to_logic() -> Outcome {
    let path = fixture("two_layer.json");
    let (code, out) = cli(&["to-logic", path.to_str().unwrap()]);
    if code != 0 {
        return Err(format!("exit code {code}"));
    }
    let v: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let got = parse(v["formula"].as_str().unwrap()).map_err(|e| e.to_string())?;
    let expected = parse(
        "def f11 := [p1] + 2 * [p2] + -3 * #p1 + 4 * #p2 + 5 >= 1;
         def f12 := 6 * [p1] + 7 * [p2] + 8 * #p1 + -9 * #p2 + 10 >= 1;
         def f21 := [f11] + 2 * [f12] + -3 * #f11 + 4 * #f12 + 5 >= 1;
         def f22 := 6 * [f11] + 7 * [f12] + 8 * #f11 + -9 * #f12 + 10 >= 1;
         5 * [f21] + -3 * [f22] >= 1",
    )
    .unwrap();
    if !is_isomorphic(&got, &expected, false) {
        return Err(format!("decompiled formula differs: {got}"));
    }
    Ok("φ11, φ12, φ21, φ22 and the root are structurally equal".into())
}

fn small_model_check() -> Outcome {
    let g = fixture("small.json");
    let f = fixture("small.ks");
    let (code, out) = cli(&["check", "--graph", g.to_str().unwrap(), "--vertex", "u", "--formula", f.to_str().unwrap()]);
    let v: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    if code != 0 || v["holds"] != Value::Bool(true) {
        return Err(format!("exit {code}, output {out}"));
    }
    Ok("holds at u".into())
}

fn formula_to_gnn_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let pairs = 1000;
    let mut vertices = 0;
    for i in 0..pairs {
        let k = rng.gen_range(2..=4);
        let phi = FormulaGen::new(&PROP_POOL[..k]).generate(&mut rng);
        let n = rng.gen_range(1..=8);
        let g = random_graph(n, &PROP_POOL[..k], rng.gen_range(0.1..0.6), rng.gen());
        let gnn = logic_to_gnn(&phi);
        if gnn.classify(&g) != models(&g, &phi) {
            return Err(format!("pair {i}: mismatch for {phi} on {}", g.to_json()));
        }
        vertices += n;
    }
    Ok(format!("{pairs} pairs, {vertices} pointed graphs, zero mismatches"))
}

fn gnn_to_formula_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let count = 1000;
    let mut vertices = 0;
    for i in 0..count {
        let k = rng.gen_range(1..=3);
        let m = GnnGen::new(&PROP_POOL[..k]).generate(&mut rng);
        let phi = gnn_to_logic(&m);
        for _ in 0..2 {
            let n = rng.gen_range(1..=8);
            let g = random_graph(n, &PROP_POOL[..k], rng.gen_range(0.1..0.6), rng.gen());
            if models(&g, &phi) != m.classify(&g) {
                return Err(format!("gnn {i}: mismatch on {}", g.to_json()));
            }
            vertices += n;
        }
    }
    Ok(format!("{count} GNNs, {vertices} pointed graphs, zero mismatches"))
}

fn sat_options() -> SatOptions {
    SatOptions::default()
}

fn witness(outcome: &SatOutcome) -> Option<&PointedGraph> {
    match outcome {
        SatOutcome::Sat(m) => Some(m),
        _ => None,
    }
}

/// Models found by the oracle, one per corpus formula.
struct Corpus {
    formulas: Vec<FormulaDag>,
    oracle: Vec<Option<PointedGraph>>,
}

fn build_corpus() -> Corpus {
    let formulas = corpus(CORPUS_SIZE);
    let oracle = formulas
        .iter()
        .map(|f| find_model(f, &SearchBound::for_formula(f)).expect("no candidate limit"))
        .collect();
    Corpus { formulas, oracle }
}

fn equisatisfiability(c: &Corpus) -> Outcome {
    let shared = c.formulas.iter().filter(|f| !f.is_tree()).count();
    let with_ones = c.formulas.iter().filter(|f| !f.is_one_free(f.root())).count();
    if shared == 0 || with_ones == 0 {
        return Err(format!("corpus lacks sharing ({shared}) or indicators ({with_ones})"));
    }
    let opts = sat_options();
    let mut forward_checked = [0usize; 3];
    let mut backward_checked = [0usize; 3];
    let mut undecided = [0usize; 3];
    for (i, phi) in c.formulas.iter().enumerate() {
        let (t, tt) = dag_to_tree(phi);
        let (o, ot) = eliminate_ones(&t);
        let e = eml_normal_atoms(&o);
        let stages: [(&str, &FormulaDag, &FormulaDag); 3] = [("tree", phi, &t), ("drop-ones", &t, &o), ("eml", &o, &e)];

        if let Some(m) = &c.oracle[i] {
            let g1 = tt.forward(&m.graph);
            let g2 = ot.forward(&g1);
            let images = [&g1, &g2, &g2];
            for (s, (name, _, output)) in stages.iter().enumerate() {
                if !check(images[s], m.point, output) {
                    return Err(format!("formula {i}: forward map of stage {name} fails on {phi}"));
                }
                forward_checked[s] += 1;
            }
            if !check(&tt.backward(&g1), m.point, phi) || !check(&ot.backward(&g2), m.point, &t) {
                return Err(format!("formula {i}: backward of forward image fails on {phi}"));
            }
        }

        for (s, (name, input, output)) in stages.iter().enumerate() {
            let report = satisfiable_with(output, &opts);
            let Some(w) = witness(&report.outcome) else {
                if let SatOutcome::ResourceExhausted(_) = report.outcome {
                    undecided[s] += 1;
                } else if c.oracle[i].is_some() {
                    return Err(format!("formula {i}: stage {name} output unsat although the input has a model"));
                }
                continue;
            };
            let back: LabeledGraph = match s {
                0 => tt.backward(&w.graph),
                1 => ot.backward(&w.graph),
                _ => w.graph.clone(),
            };
            if !check(&back, w.point, input) {
                return Err(format!("formula {i}: backward map of stage {name} fails on {phi}"));
            }
            backward_checked[s] += 1;
        }
    }
    if undecided.iter().any(|u| *u > 0) {
        return Err(format!("budget exhausted on stage outputs: {undecided:?}"));
    }
    Ok(format!(
        "{} formulas ({shared} shared, {with_ones} with indicators); forward maps verified {forward_checked:?}, backward maps verified {backward_checked:?} (tree, drop-ones, eml)",
        c.formulas.len()
    ))
}

fn sat_soundness(c: &Corpus) -> Outcome {
    let mut counts = [0usize; 3];
    for strategy in [Strategy::Direct, Strategy::Reductions] {
        let opts = SatOptions { strategy, ..sat_options() };
        for (i, phi) in c.formulas.iter().enumerate() {
            match satisfiable_with(phi, &opts).outcome {
                SatOutcome::Sat(m) => {
                    if !check(&m.graph, m.point, phi) {
                        return Err(format!("formula {i} ({strategy:?}): witness does not satisfy {phi}"));
                    }
                    counts[0] += 1;
                }
                SatOutcome::Unsat => {
                    if c.oracle[i].is_some() {
                        return Err(format!("formula {i} ({strategy:?}): unsat but the oracle found a model of {phi}"));
                    }
                    counts[1] += 1;
                }
                SatOutcome::ResourceExhausted(r) => {
                    counts[2] += 1;
                    eprintln!("formula {i} ({strategy:?}): {r}");
                }
            }
        }
    }
    let found = c.oracle.iter().filter(|m| m.is_some()).count();
    if counts[2] > 0 {
        return Err(format!("{} indeterminate answers", counts[2]));
    }
    Ok(format!(
        "two strategies x {} formulas: {} sat (all witnesses verified), {} unsat, oracle found {found} models, zero disagreements",
        c.formulas.len(),
        counts[0],
        counts[1]
    ))
}

fn size_bounds(c: &Corpus) -> Outcome {
    let mut worst_tree = 0f64;
    let mut worst_box = 0f64;
    for (i, phi) in c.formulas.iter().enumerate() {
        let n = phi.size() as u128;
        let (t, _) = dag_to_tree(phi);
        let out = t.tree_size(t.root());
        let bound = 2 * n * n * n + TREE_K;
        if out > bound {
            return Err(format!("formula {i}: |tree| = {out} > {bound}"));
        }
        worst_tree = worst_tree.max(out as f64 / bound as f64);
        let base = phi.tree_size(phi.root());
        for m in 1..=4u128 {
            let mut d = FormulaDag::new();
            let mut imp = Importer::new(phi, false);
            let r = box_upto_tree(&mut d, m as usize, &mut |dst| imp.formula(dst, phi.root()));
            let size = d.tree_size(r);
            let bound = BOX_C * m * (m + base);
            if size > bound {
                return Err(format!("formula {i}, m = {m}: |box| = {size} > {bound}"));
            }
            worst_box = worst_box.max(size as f64 / bound as f64);
        }
    }
    Ok(format!(
        "K = {TREE_K}, C = {BOX_C}; largest ratio to bound: tree {worst_tree:.3}, bounded box {worst_box:.3}"
    ))
}

fn answer(kind: TaskKind, gnn: &GnnModel, phi: &FormulaDag) -> Answer {
    verify(kind, gnn, phi, &sat_options()).answer
}

fn end_to_end(c: &Corpus) -> Outcome {
    let tubas = common::fixture_formula("tubas.ks");
    let a = logic_to_gnn(&tubas);
    let p1 = answer(TaskKind::P1, &a, &tubas);
    if p1 != Answer::Holds {
        return Err(format!("P1 on few-tubas: {}", p1.name()));
    }

    let opts = sat_options();
    for (i, phi) in c.formulas.iter().take(100).enumerate() {
        let props = phi.propositions().to_vec();
        let sat = satisfiable_with(phi, &opts).outcome;
        if let SatOutcome::ResourceExhausted(r) = &sat {
            return Err(format!("formula {i}: satisfiability indeterminate: {r}"));
        }
        let p4 = answer(TaskKind::P4, &GnnModel::accept_all(props.clone()), phi);
        let p3 = answer(TaskKind::P3, &GnnModel::reject_all(props), phi);
        if (p4 == Answer::Holds) != sat.is_sat() || p4 == Answer::Indeterminate {
            return Err(format!("formula {i}: P4 with A_all is {}, sat is {}", p4.name(), sat.is_sat()));
        }
        if (p3 == Answer::Holds) != sat.is_unsat() || p3 == Answer::Indeterminate {
            return Err(format!("formula {i}: P3 with A_none is {}, unsat is {}", p3.name(), sat.is_unsat()));
        }
    }

    let props = ["p", "q"];
    let gnns = GnnGen { max_layers: 2, max_dim: 3, max_coeff: 3, ..GnnGen::new(&props) };
    let formulas = FormulaGen::new(&props).with_max_nodes(12);
    let (mut holds, mut p2_only, mut p3_only) = (0, 0, 0);
    for i in 0..100u64 {
        let m = gnns.generate_seeded(7000 + i);
        let psi = formulas.generate_seeded(8000 + i);
        let phi = match i % 4 {
            0 => gnn_to_logic(&m),
            1 => combine(&gnn_to_logic(&m), &psi, false),
            2 => combine(&gnn_to_logic(&m), &psi, true),
            _ => psi,
        };
        let [p1, p2, p3] = [TaskKind::P1, TaskKind::P2, TaskKind::P3].map(|k| answer(k, &m, &phi));
        if [p1, p2, p3].contains(&Answer::Indeterminate) {
            return Err(format!("pair {i}: indeterminate ({}, {}, {})", p1.name(), p2.name(), p3.name()));
        }
        if (p1 == Answer::Holds) != (p2 == Answer::Holds && p3 == Answer::Holds) {
            return Err(format!("pair {i}: P1 {}, P2 {}, P3 {}", p1.name(), p2.name(), p3.name()));
        }
        holds += (p1 == Answer::Holds) as usize;
        p2_only += (p2 == Answer::Holds && p3 != Answer::Holds) as usize;
        p3_only += (p3 == Answer::Holds && p2 != Answer::Holds) as usize;
    }
    Ok(format!(
        "few-tubas P1 holds; A_all/A_none identities on 100 formulas; P1 = P2 and P3 on 100 pairs ({holds} equivalent, {p2_only} only P2, {p3_only} only P3)"
    ))
}

/// `a ∧ b` or `a ∨ b` in a fresh dag.
fn combine(a: &FormulaDag, b: &FormulaDag, and: bool) -> FormulaDag {
    let mut d = FormulaDag::new();
    let x = Importer::new(a, true).formula(&mut d, a.root());
    let y = Importer::new(b, true).formula(&mut d, b.root());
    let r = if and { d.and(x, y) } else { d.or(x, y) };
    d.set_root(r);
    d
}

/// Smallest per-call time over three batches of at least 20 ms each.
fn time_per_call(mut f: impl FnMut()) -> f64 {
    let mut reps = 1u32;
    loop {
        let start = Instant::now();
        for _ in 0..reps {
            f();
        }
        if start.elapsed() >= Duration::from_millis(20) {
            break;
        }
        reps *= 2;
    }
    (0..3)
        .map(|_| {
            let start = Instant::now();
            for _ in 0..reps {
                f();
            }
            start.elapsed().as_secs_f64() / reps as f64
        })
        .fold(f64::INFINITY, f64::min)
}

/// Least-squares slope of `log t` against `log n`.
fn slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// A formula of roughly `n` nodes: a chain alternating counting atoms,
/// disjunctions and negations over two propositions.
fn chain_formula(n: usize) -> FormulaDag {
    let mut d = FormulaDag::new();
    let p = d.prop("p");
    let q = d.prop("q");
    let mut cur = p;
    let mut i = 0;
    while d.size_of(cur) < n {
        cur = match i % 3 {
            0 => {
                let c = d.count(cur);
                let one = d.one(q);
                let s = d.scale(2, one);
                let sum = d.add(c, s);
                let k = d.constant(-1);
                let e = d.add(sum, k);
                d.geq_zero(e)
            }
            1 => d.or(cur, q),
            _ => d.not(cur),
        };
        i += 1;
    }
    d.set_root(cur);
    d
}

/// A GNN with width 5 and about `n / 5` layers.
fn layered_gnn(n: usize) -> GnnModel {
    let gen = GnnGen::new(&["p", "q"]);
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    let layers = (n / 5).max(1);
    let mut dim = 2;
    let mut out = Vec::new();
    for _ in 0..layers {
        out.push(gen.layer(&mut rng, dim, 5));
        dim = 5;
    }
    GnnModel::from_layers(vec!["p".into(), "q".into()], out, vec![Int::from(1); 5]).unwrap()
}

fn polynomiality() -> Outcome {
    let mut to_gnn = Vec::new();
    let mut to_logic = Vec::new();
    for n in [10, 100, 1000] {
        let phi = chain_formula(n);
        to_gnn.push((phi.size() as f64, time_per_call(|| drop(logic_to_gnn(&phi)))));
        let m = layered_gnn(n);
        let size = (m.num_neurons() + m.nnz()).to_f64().unwrap();
        to_logic.push((size, time_per_call(|| drop(gnn_to_logic(&m)))));
    }
    let (a, b) = (slope(&to_gnn), slope(&to_logic));
    let msg = format!("log-log slopes: logic_to_gnn {a:.2}, gnn_to_logic {b:.2}");
    if a < 2.5 && b < 2.5 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() {
    let start = Instant::now();
    let mut failed = 0;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("criterion {n:>2} PASS  {name} ({secs:.1}s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name} ({secs:.1}s): {msg}")
            }
        }
    };
    report(1, "golden to-gnn", &mut golden_to_gnn);
    report(2, "golden to-logic", &mut golden_to_logic);
    report(3, "small model check", &mut small_model_check);
    report(4, "formula to GNN agrees with model checking", &mut formula_to_gnn_property);
    report(5, "GNN to formula agrees with the classifier", &mut gnn_to_formula_property);
    let t = Instant::now();
    let c = build_corpus();
    println!("corpus: {} formulas, oracle search {:.1}s", c.formulas.len(), t.elapsed().as_secs_f64());
    report(6, "reduction equi-satisfiability", &mut || equisatisfiability(&c));
    report(7, "sat soundness and oracle agreement", &mut || sat_soundness(&c));
    report(8, "size bounds", &mut || size_bounds(&c));
    report(9, "verification tasks end to end", &mut || end_to_end(&c));
    report(10, "translation polynomiality", &mut polynomiality);
    println!("acceptance: {} failed, total {:.1}s", failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
