//! Command-line front end. Results go to standard output as JSON, a short
//! human summary to standard error.
//!
//! Exit codes: 0 holds / satisfiable / true, 1 fails / unsatisfiable /
//! false, 2 indeterminate (budget exhausted), 3 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::formula::{parse, FormulaDag, ParseError};
use crate::gnn::{GnnError, GnnModel};
use crate::graph::{GraphError, LabeledGraph};
use crate::oracle::{find_model, SearchBound, MAX_ORACLE_VERTICES};
use crate::random::{random_graph, FormulaGen, GnnGen};
use crate::reductions::{dag_to_tree, eliminate_ones, eml_normal_atoms};
use crate::sat::{satisfiable_with, Budget, SatOptions, SatOutcome, SatStats, Strategy};
use crate::semantics::{check, models};
use crate::transpile::{gnn_to_logic, logic_to_gnn, logic_to_gnn_shallow, ShallowError, ShallowOptions};
use crate::verify::{verify, Answer, TaskKind};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ksharp", version, about = "Counting modal logic K# and GNN verification")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Opts {
    /// Graph JSON file.
    #[arg(long, global = true, value_name = "PATH")]
    graph: Option<PathBuf>,
    /// Vertex id in the graph.
    #[arg(long, global = true, value_name = "ID")]
    vertex: Option<String>,
    /// Formula file (.ks).
    #[arg(long, global = true, value_name = "PATH")]
    formula: Option<PathBuf>,
    /// GNN JSON file.
    #[arg(long, global = true, value_name = "PATH")]
    gnn: Option<PathBuf>,
    /// Also write the main artifact (GNN, formula, witness) to this file.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Wall-clock budget for satisfiability in milliseconds.
    #[arg(long, global = true, value_name = "N")]
    budget_ms: Option<u64>,
    /// Branch budget for satisfiability.
    #[arg(long, global = true, value_name = "N")]
    max_branches: Option<u64>,
    /// Seed for randomized helpers.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    seed: u64,
    /// Print the search log to standard error.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Does the formula hold at the vertex?
    Check,
    /// Truth of the formula at every vertex.
    Eval,
    /// Satisfiability, with a witness model.
    Sat {
        #[arg(long, value_enum, default_value_t = StrategyArg::Direct)]
        strategy: StrategyArg,
    },
    /// Formula to GNN, one layer per subformula.
    ToGnn {
        /// Formula file; alternative to --formula.
        input: Option<PathBuf>,
    },
    /// Formula to GNN with few layers.
    ToGnnShallow {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = ShallowOptions::default().max_literals)]
        max_literals: usize,
    },
    /// GNN to an equivalent formula.
    ToLogic {
        /// GNN file; alternative to --gnn.
        input: Option<PathBuf>,
    },
    /// Run the reduction chain up to a stage.
    Reduce {
        #[arg(long, value_enum)]
        stage: Stage,
        input: Option<PathBuf>,
    },
    /// Decide a GNN verification question.
    Verify {
        #[arg(value_parser = parse_task)]
        task: TaskKind,
    },
    /// Brute-force model search.
    #[command(hide = true)]
    OracleFind {
        #[arg(long, default_value_t = 4)]
        max_vertices: usize,
    },
    /// Random formula, GNN or graph from --seed.
    #[command(hide = true)]
    Random {
        #[arg(value_enum)]
        kind: RandomKind,
        /// Propositions, comma separated.
        #[arg(long, default_value = "p,q")]
        props: String,
        /// Vertices of a random graph.
        #[arg(long, default_value_t = 5)]
        vertices: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Direct,
    Reductions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Stage {
    Tree,
    DropOnes,
    Eml,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RandomKind {
    Formula,
    Gnn,
    Graph,
}

fn parse_task(s: &str) -> Result<TaskKind, String> {
    s.parse()
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read `{path}`: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write `{path}`: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}:{source}")]
    Formula { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Graph { path: PathBuf, source: GraphError },
    #[error("{path}: {source}")]
    Gnn { path: PathBuf, source: GnnError },
    #[error("{0}")]
    Shallow(#[from] ShallowError),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

/// Runs the command line with the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the command line, writing JSON to `out` and the summary to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_HOLDS
                }
                _ => EXIT_USAGE,
            };
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let o = &cli.opts;
    match &cli.command {
        Command::Check => {
            let g = load_graph(need(&o.graph, "--graph")?)?;
            let f = load_formula(need(&o.formula, "--formula")?)?;
            let id = need(&o.vertex, "--vertex")?;
            let v = vertex(&g, id)?;
            let holds = check(&g, v, &f);
            emit(out, json!({"command": "check", "vertex": id, "holds": holds}))?;
            writeln!(err, "formula {} at {id}", if holds { "holds" } else { "does not hold" })?;
            Ok(if holds { EXIT_HOLDS } else { EXIT_FAILS })
        }
        Command::Eval => {
            let g = load_graph(need(&o.graph, "--graph")?)?;
            let f = load_formula(need(&o.formula, "--formula")?)?;
            let row = models(&g, &f);
            let mut m = Map::new();
            for (v, b) in row.iter().enumerate() {
                m.insert(g.vertex_id(v).to_string(), json!(b));
            }
            let n = row.iter().filter(|b| **b).count();
            emit(out, json!({"command": "eval", "models": m, "count": n}))?;
            writeln!(err, "formula holds at {n} of {} vertices", g.num_vertices())?;
            Ok(EXIT_HOLDS)
        }
        Command::Sat { strategy } => {
            let f = load_formula(need(&o.formula, "--formula")?)?;
            let strategy = match strategy {
                StrategyArg::Direct => Strategy::Direct,
                StrategyArg::Reductions => Strategy::Reductions,
            };
            let opts = SatOptions { budget: budget(o), strategy, verbose: o.verbose };
            let report = satisfiable_with(&f, &opts);
            print_log(err, &report.stats)?;
            let (answer, witness, point, reason, code) = match &report.outcome {
                SatOutcome::Sat(m) => {
                    ("sat", m.graph.to_value(), json!(m.graph.vertex_id(m.point)), Value::Null, EXIT_HOLDS)
                }
                SatOutcome::Unsat => ("unsat", Value::Null, Value::Null, Value::Null, EXIT_FAILS),
                SatOutcome::ResourceExhausted(r) => {
                    ("indeterminate", Value::Null, Value::Null, json!(r), EXIT_INDETERMINATE)
                }
            };
            if let (SatOutcome::Sat(m), Some(path)) = (&report.outcome, &o.out) {
                write_file(path, &m.graph.to_json())?;
            }
            let mut body = Map::new();
            body.insert("command".into(), json!("sat"));
            body.insert("answer".into(), json!(answer));
            body.insert("witness".into(), witness);
            body.insert("point".into(), point);
            if !reason.is_null() {
                body.insert("reason".into(), reason);
            }
            body.insert("stats".into(), stats_value(&report.stats));
            emit(out, Value::Object(body))?;
            match &report.outcome {
                SatOutcome::Sat(m) => writeln!(err, "satisfiable; witness has {} vertices", m.graph.num_vertices())?,
                SatOutcome::Unsat => writeln!(err, "unsatisfiable")?,
                SatOutcome::ResourceExhausted(r) => writeln!(err, "indeterminate: {r}")?,
            }
            Ok(code)
        }
        Command::ToGnn { input } => {
            let f = load_formula(either(input, &o.formula, "formula")?)?;
            let m = logic_to_gnn(&f);
            write_gnn(out, err, o, &m)
        }
        Command::ToGnnShallow { input, max_literals } => {
            let f = load_formula(either(input, &o.formula, "formula")?)?;
            let opts = ShallowOptions { max_literals: *max_literals, ..ShallowOptions::default() };
            let m = logic_to_gnn_shallow(&f, &opts)?;
            write_gnn(out, err, o, &m)
        }
        Command::ToLogic { input } => {
            let m = load_gnn(either(input, &o.gnn, "gnn")?)?;
            let f = gnn_to_logic(&m);
            let text = f.to_string();
            if let Some(p) = &o.out {
                write_file(p, &format!("{text}\n"))?;
            }
            emit(
                out,
                json!({
                    "command": "to-logic",
                    "formula": text,
                    "size": f.size(),
                    "modal_depth": f.modal_depth(f.root()),
                }),
            )?;
            writeln!(err, "formula with {} nodes, modal depth {}", f.size(), f.modal_depth(f.root()))?;
            Ok(EXIT_HOLDS)
        }
        Command::Reduce { stage, input } => {
            let f = load_formula(either(input, &o.formula, "formula")?)?;
            let (t, tt) = dag_to_tree(&f);
            let mut fresh: Vec<String> = tt.fresh_props().map(String::from).collect();
            let result = if *stage == Stage::Tree {
                t
            } else {
                let (d, ot) = eliminate_ones(&t);
                fresh.extend(ot.fresh_props().map(String::from));
                if *stage == Stage::Eml {
                    eml_normal_atoms(&d)
                } else {
                    d
                }
            };
            let text = result.to_string();
            if let Some(p) = &o.out {
                write_file(p, &format!("{text}\n"))?;
            }
            let stage_name = match stage {
                Stage::Tree => "tree",
                Stage::DropOnes => "drop-ones",
                Stage::Eml => "eml",
            };
            emit(
                out,
                json!({
                    "command": "reduce",
                    "stage": stage_name,
                    "input_size": f.size(),
                    "size": result.size(),
                    "modal_depth": result.modal_depth(result.root()),
                    "fresh_propositions": fresh,
                    "formula": text,
                }),
            )?;
            writeln!(err, "{stage_name}: {} nodes -> {} nodes", f.size(), result.size())?;
            Ok(EXIT_HOLDS)
        }
        Command::Verify { task } => {
            let m = load_gnn(need(&o.gnn, "--gnn")?)?;
            let f = load_formula(need(&o.formula, "--formula")?)?;
            let opts = SatOptions { budget: budget(o), strategy: Strategy::Direct, verbose: o.verbose };
            let v = verify(*task, &m, &f, &opts);
            print_log(err, &v.stats)?;
            if let (Some(c), Some(p)) = (&v.certificate, &o.out) {
                write_file(p, &c.graph.to_json())?;
            }
            emit(out, v.to_value())?;
            match (&v.answer, &v.reason) {
                (Answer::Indeterminate, Some(r)) => writeln!(err, "{task}: indeterminate: {r}")?,
                (a, _) => writeln!(err, "{task}: {}", a.name())?,
            }
            Ok(match v.answer {
                Answer::Holds => EXIT_HOLDS,
                Answer::Fails => EXIT_FAILS,
                Answer::Indeterminate => EXIT_INDETERMINATE,
            })
        }
        Command::OracleFind { max_vertices } => {
            let f = load_formula(need(&o.formula, "--formula")?)?;
            if !(1..=MAX_ORACLE_VERTICES).contains(max_vertices) {
                return Err(CliError::Usage(format!("--max-vertices must be in 1..={MAX_ORACLE_VERTICES}")));
            }
            let mut bound = SearchBound::for_formula(&f);
            bound.max_vertices = *max_vertices;
            let found = find_model(&f, &bound).map_err(|e| CliError::Usage(e.to_string()))?;
            let (model, point) = match &found {
                Some(m) => (m.graph.to_value(), json!(m.graph.vertex_id(m.point))),
                None => (Value::Null, Value::Null),
            };
            emit(out, json!({"command": "oracle-find", "found": found.is_some(), "model": model, "point": point}))?;
            writeln!(err, "{}", if found.is_some() { "model found" } else { "no model within the bound" })?;
            Ok(if found.is_some() { EXIT_HOLDS } else { EXIT_FAILS })
        }
        Command::Random { kind, props, vertices } => {
            let props: Vec<&str> = props.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            if props.is_empty() {
                return Err(CliError::Usage("--props needs at least one name".into()));
            }
            let text = match kind {
                RandomKind::Formula => format!("{}\n", FormulaGen::new(&props).generate_seeded(o.seed)),
                RandomKind::Gnn => GnnGen::new(&props).generate_seeded(o.seed).to_json(),
                RandomKind::Graph => random_graph(*vertices, &props, 0.4, o.seed).to_json(),
            };
            if let Some(p) = &o.out {
                write_file(p, &text)?;
            }
            write!(out, "{text}")?;
            Ok(EXIT_HOLDS)
        }
    }
}

fn write_gnn(out: &mut dyn Write, err: &mut dyn Write, o: &Opts, m: &GnnModel) -> Result<i32, CliError> {
    let text = m.to_json();
    if let Some(p) = &o.out {
        write_file(p, &text)?;
    }
    writeln!(out, "{}", text.trim_end())?;
    writeln!(err, "GNN with {} layers, {} neurons", m.num_layers(), m.num_neurons())?;
    Ok(EXIT_HOLDS)
}

fn budget(o: &Opts) -> Budget {
    let mut b = Budget::default();
    if let Some(ms) = o.budget_ms {
        b.time_limit = Some(Duration::from_millis(ms));
    }
    if let Some(n) = o.max_branches {
        b.max_branches = n;
    }
    b
}

fn stats_value(s: &SatStats) -> Value {
    json!({
        "branches": s.branches,
        "worlds": s.worlds,
        "memo_hits": s.memo_hits,
        "ilp_calls": s.ilp_calls,
    })
}

fn print_log(err: &mut dyn Write, s: &SatStats) -> std::io::Result<()> {
    for line in &s.log {
        writeln!(err, "{line}")?;
    }
    Ok(())
}

fn emit(out: &mut dyn Write, v: Value) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(&v).expect("JSON values serialize");
    writeln!(out, "{text}")
}

fn need<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T, CliError> {
    v.as_ref().ok_or_else(|| CliError::Usage(format!("missing {flag}")))
}

fn either<'a>(pos: &'a Option<PathBuf>, flag: &'a Option<PathBuf>, what: &str) -> Result<&'a PathBuf, CliError> {
    match (pos, flag) {
        (Some(_), Some(_)) => Err(CliError::Usage(format!("give the {what} either positionally or with --{what}, not both"))),
        (Some(p), None) | (None, Some(p)) => Ok(p),
        (None, None) => Err(CliError::Usage(format!("missing {what} file"))),
    }
}

fn vertex(g: &LabeledGraph, id: &str) -> Result<usize, CliError> {
    g.vertex_index(id).ok_or_else(|| CliError::Usage(format!("unknown vertex `{id}`")))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

pub fn load_formula(path: &Path) -> Result<FormulaDag, CliError> {
    let text = read(path)?;
    parse(&text).map_err(|source| CliError::Formula { path: path.to_path_buf(), source })
}

pub fn load_graph(path: &Path) -> Result<LabeledGraph, CliError> {
    let text = read(path)?;
    LabeledGraph::from_json(&text).map_err(|source| CliError::Graph { path: path.to_path_buf(), source })
}

pub fn load_gnn(path: &Path) -> Result<GnnModel, CliError> {
    let text = read(path)?;
    GnnModel::from_json(&text).map_err(|source| CliError::Gnn { path: path.to_path_buf(), source })
}
