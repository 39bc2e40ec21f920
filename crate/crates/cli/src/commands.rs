//! Subcommand definitions and their reports.
//!
//! Every command yields a [`Report`] holding the exit code, a text
//! rendering in stable `key: value` lines and a JSON rendering with the
//! same content. Exit code 0 means the checked property holds, 1 that it
//! fails with a witness printed, 2 that the input was unusable.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use mmetric::blocks::is_archimedean;
use mmetric::graph::{find_nonmetric_cycle, shortest_path_completion, strong_amalgamation, CycleWitness};
use mmetric::lstar::{extract_obstruction, lstar_expand, star_completion, validate_lstar, StarOutcome};
use mmetric::monoid::{check_four_values, parse_rational, validate_monoid, AxiomWitness, DistanceSet, Q};
use mmetric::mus::{bound_n_of_s, compute_mus};
use mmetric::oracle::{
    enumerate_completions, oracle_blocks, oracle_four_values, oracle_lstar_completable, EnumerationBudget,
};
use mmetric::order::{check_convex_order, make_convex_order};
use mmetric::{DistanceMonoid, Elem, MGraph, MonoidKind, Verdict};

use crate::format::{self, GraphFile};
use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "mm", version, about = "Distance monoids, generalized metric spaces and their completions")]
pub struct Cli {
    /// Print reports as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Monoid axioms, blocks, mus tables and bounds.
    #[command(subcommand)]
    Monoid(MonoidCmd),
    /// Metric checks, completion and amalgamation of partial graphs.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Convex orders of complete spaces.
    #[command(subcommand)]
    Order(OrderCmd),
    /// Ball-vertex expansions and their completion.
    #[command(subcommand)]
    Lstar(LstarCmd),
    /// Brute-force reference computations.
    #[command(subcommand)]
    Oracle(OracleCmd),
}

#[derive(Args, Debug)]
pub struct SetArgs {
    pub file: PathBuf,
    /// Comma-separated distance set, e.g. `1,3`.
    #[arg(long)]
    pub set: String,
}

#[derive(Args, Debug)]
pub struct OutArgs {
    pub file: PathBuf,
    /// Write the result here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum MonoidCmd {
    /// Check every axiom (and the 4-values condition for truncated monoids).
    Check { file: PathBuf },
    /// Print the archimedean blocks.
    Blocks { file: PathBuf },
    /// Print the mus table of a distance set.
    Mus(SetArgs),
    /// Print n_i, n(S) and the obstruction bound of a distance set.
    Bounds(SetArgs),
    /// Decide the 4-values condition for a monoid file or a value list.
    Fourvalues {
        file: Option<PathBuf>,
        /// Comma-separated positive rationals.
        #[arg(long, conflicts_with = "file")]
        values: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum GraphCmd {
    /// Check a graph file, or every `.mg` file of a directory, for non-metric cycles.
    Check { path: PathBuf },
    /// Shortest-path completion.
    Complete(OutArgs),
    /// Strong amalgamation of B1 and B2 over their common part A.
    Amalgamate {
        a: PathBuf,
        b1: PathBuf,
        b2: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum OrderCmd {
    /// Check that the order of a complete graph is convex.
    Check { file: PathBuf },
    /// Replace the order by a convex one.
    Make(OutArgs),
}

#[derive(Subcommand, Debug)]
pub enum LstarCmd {
    /// Expand a complete, convexly ordered graph (ordered convexly first if unordered).
    Expand(OutArgs),
    /// Check the consistency clauses.
    Validate { file: PathBuf },
    /// Complete a structure or print the non-metric cycle preventing it.
    Complete(OutArgs),
    /// Extract a small non-completable substructure.
    Obstruct(OutArgs),
}

#[derive(Args, Debug)]
pub struct BudgetArgs {
    /// Largest number of vertices the oracle enumerates.
    #[arg(long, env = "MM_BUDGET_VERTICES", default_value_t = 5)]
    pub budget_vertices: usize,
}

#[derive(Subcommand, Debug)]
pub enum OracleCmd {
    /// Enumerate every metric completion of a graph.
    Completions {
        file: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Blocks by brute-force mutual domination.
    Blocks {
        file: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// The 4-values condition by direct quantifier sweep.
    Fourvalues {
        #[arg(long)]
        values: String,
    },
    /// Decide completability of an L* structure by enumeration.
    Lstar {
        file: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

/// Outcome of one command.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub code: i32,
    pub text: String,
    pub json: Value,
}

impl Report {
    fn new(code: i32, text: String, json: Value) -> Self {
        Report { code, text, json }
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let mut s = serde_json::to_string_pretty(&self.json).expect("serializable");
            s.push('\n');
            s
        } else {
            self.text.clone()
        }
    }
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Monoid(c) => monoid(c),
        Command::Graph(c) => graph(c),
        Command::Order(c) => order(c),
        Command::Lstar(c) => lstar(c),
        Command::Oracle(c) => oracle(c),
    }
}

fn labels(m: &DistanceMonoid, es: &[Elem]) -> Vec<String> {
    es.iter().map(|&e| m.label(e)).collect()
}

fn parse_values(list: &str) -> Result<Vec<Q>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| parse_rational(t).ok_or_else(|| CliError::Syntax(format!("`{}` is not a rational", t))))
        .collect()
}

fn axiom_witness(m: &DistanceMonoid, w: &AxiomWitness) -> String {
    match *w {
        AxiomWitness::Pair(a, b) => format!("{} {}", m.label(a), m.label(b)),
        AxiomWitness::Triple(a, b, c) => format!("{} {} {}", m.label(a), m.label(b), m.label(c)),
        AxiomWitness::Identity(a) | AxiomWitness::BelowZero(a) => m.label(a),
        AxiomWitness::Monotone { lo, hi, with } => format!("{} {} {}", m.label(lo), m.label(hi), m.label(with)),
    }
}

fn four_values_report(values: &[Q]) -> (bool, String, Value) {
    match check_four_values(values) {
        Verdict::Fails(w) => {
            let ws = format!("a={} b={} c={} d={} x={}", w.a, w.b, w.c, w.d, w.x);
            (false, format!("four-values: fails ({})\n", ws), json!({"holds": false, "witness": ws}))
        }
        _ => (true, "four-values: holds\n".into(), json!({"holds": true})),
    }
}

fn monoid(cmd: &MonoidCmd) -> Result<Report, CliError> {
    match cmd {
        MonoidCmd::Check { file } => {
            let m = format::load_monoid_unchecked(file)?;
            let report = validate_monoid(&m);
            let mut text = format!("kind: {}\n", m.kind().name());
            let mut axioms = serde_json::Map::new();
            for (axiom, verdict) in &report.checks {
                let (line, val) = match verdict {
                    Verdict::Holds => ("holds".to_string(), json!("holds")),
                    Verdict::HoldsAnalytically => ("holds (analytic)".to_string(), json!("holds-analytically")),
                    Verdict::Fails(w) => {
                        let ws = axiom_witness(&m, w);
                        (format!("fails ({})", ws), json!({"fails": ws}))
                    }
                };
                let _ = writeln!(text, "{}: {}", axiom.name(), line);
                axioms.insert(axiom.name().into(), val);
            }
            let mut out = json!({"kind": m.kind().name(), "axioms": axioms, "valid": report.is_valid()});
            if let Some(vals) = m.truncated_values() {
                let (_, t, j) = four_values_report(vals);
                text.push_str(&t);
                out["four_values"] = j;
            }
            let _ = writeln!(text, "valid: {}", if report.is_valid() { "yes" } else { "no" });
            Ok(Report::new(if report.is_valid() { 0 } else { 1 }, text, out))
        }
        MonoidCmd::Blocks { file } => {
            let m = format::load_monoid(file)?;
            let blocks = m.blocks()?;
            let names: Vec<String> = blocks.nonzero_blocks().into_iter().map(|b| blocks.describe(&m, b)).collect();
            let arch = is_archimedean(&m)?.holds();
            let text = format!("blocks: {}\narchimedean: {}\n", names.join(" "), if arch { "yes" } else { "no" });
            Ok(Report::new(0, text, json!({"blocks": names, "archimedean": arch})))
        }
        MonoidCmd::Mus(a) | MonoidCmd::Bounds(a) => {
            let m = format::load_monoid(&a.file)?;
            let s = DistanceSet::parse(&m, &a.set)?;
            let set: Vec<String> = s.iter().map(|e| m.label(e)).collect();
            let table = compute_mus(&m, &s)?;
            let blocks = m.blocks()?;
            let mut text = format!("set: {}\n", set.join(" "));
            if matches!(cmd, MonoidCmd::Mus(_)) {
                let mut rows = serde_json::Map::new();
                for (&b, &e) in &table.per_block {
                    let name = blocks.describe(&m, b);
                    let _ = writeln!(text, "mus {}: {}", name, m.label(e));
                    rows.insert(name, json!(m.label(e)));
                }
                return Ok(Report::new(0, text, json!({"set": set, "mus": rows})));
            }
            let bounds = bound_n_of_s(&m, &s, &table)?;
            let mut rows = serde_json::Map::new();
            for (&b, &n) in &bounds.per_block_n {
                let name = blocks.describe(&m, b);
                let _ = writeln!(text, "n {}: {}", name, n);
                rows.insert(name, json!(n));
            }
            let _ = writeln!(text, "n(S): {}\nm: {}\nbound: {}", bounds.n_of_s, bounds.m, bounds.obstruction_bound);
            Ok(Report::new(
                0,
                text,
                json!({"set": set, "n": rows, "n_of_s": bounds.n_of_s, "m": bounds.m, "bound": bounds.obstruction_bound}),
            ))
        }
        MonoidCmd::Fourvalues { file, values } => {
            let vals = match (file, values) {
                (_, Some(list)) => parse_values(list)?,
                (Some(f), None) => {
                    let m = format::load_monoid_unchecked(f)?;
                    if m.kind() != MonoidKind::TruncatedRationals {
                        return Err(mmetric::Error::Unsupported("the 4-values condition concerns truncated-rationals monoids".into()).into());
                    }
                    m.truncated_values().expect("truncated").to_vec()
                }
                (None, None) => return Err(CliError::Syntax("give a monoid file or --values".into())),
            };
            let (holds, text, j) = four_values_report(&vals);
            Ok(Report::new(if holds { 0 } else { 1 }, text, j))
        }
    }
}

fn cycle_text(g: &MGraph, w: &CycleWitness) -> (String, Value) {
    let m = g.monoid();
    let (ell, seq) = w.labels(g);
    let ids: Vec<&str> = w.vertices.iter().map(|&v| g.id(v)).collect();
    let (a, b) = w.violated_edge();
    let len = m.sum_all(seq.iter().copied());
    let text = format!(
        "cycle: {}\nviolated: d({}, {}) = {} exceeds path length {} ({})\n",
        ids.join(" "),
        g.id(a),
        g.id(b),
        m.label(ell),
        m.label(len),
        labels(m, &seq).join(" + ")
    );
    let j = json!({"cycle": ids, "violated": m.label(ell), "path": labels(m, &seq), "path_length": m.label(len)});
    (text, j)
}

/// Monoid reference valid from the directory of `out`.
fn monoid_ref_for(input: &Path, reference: &str, out: Option<&Path>) -> String {
    let Some(out) = out else { return reference.to_string() };
    let in_dir = input.parent().unwrap_or(Path::new(""));
    let out_dir = out.parent().unwrap_or(Path::new(""));
    if in_dir == out_dir || Path::new(reference).is_absolute() {
        return reference.to_string();
    }
    let resolved = format::resolve(if in_dir.as_os_str().is_empty() { Path::new(".") } else { in_dir }, reference);
    std::fs::canonicalize(&resolved).unwrap_or(resolved).display().to_string()
}

/// Writes `text` to `out` if given, returning what goes to standard output.
fn emit(text: String, out: Option<&Path>) -> Result<String, CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| CliError::Io(format!("{}: {}", path.display(), e)))?;
            Ok(format!("written: {}\n", path.display()))
        }
        None => Ok(text),
    }
}

fn check_one(path: &Path) -> Result<(bool, String, Value), CliError> {
    let gf = format::load_graph(path)?;
    Ok(match find_nonmetric_cycle(&gf.graph) {
        None => (true, "metric\n".into(), json!({"metric": true})),
        Some(w) => {
            let (t, j) = cycle_text(&gf.graph, &w);
            (false, format!("non-metric\n{}", t), json!({"metric": false, "witness": j}))
        }
    })
}

fn graph(cmd: &GraphCmd) -> Result<Report, CliError> {
    match cmd {
        GraphCmd::Check { path } if path.is_dir() => {
            let mut files: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(|e| CliError::Io(format!("{}: {}", path.display(), e)))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "mg"))
                .collect();
            files.sort();
            let (mut code, mut text, mut all) = (0, String::new(), Vec::new());
            for f in files {
                let name = f.display().to_string();
                match check_one(&f) {
                    Ok((ok, t, j)) => {
                        code = code.max(if ok { 0 } else { 1 });
                        for (i, line) in t.lines().enumerate() {
                            let _ = writeln!(text, "{}{}", if i == 0 { format!("{}: ", name) } else { "  ".into() }, line);
                        }
                        all.push(json!({"file": name, "result": j}));
                    }
                    Err(e) => {
                        code = 2;
                        let _ = writeln!(text, "{}: error: {}", name, e);
                        all.push(json!({"file": name, "error": e.to_string()}));
                    }
                }
            }
            Ok(Report::new(code, text, Value::Array(all)))
        }
        GraphCmd::Check { path } => {
            let (ok, t, j) = check_one(path)?;
            Ok(Report::new(if ok { 0 } else { 1 }, t, j))
        }
        GraphCmd::Complete(a) => {
            let gf = format::load_graph(&a.file)?;
            match shortest_path_completion(&gf.graph) {
                Ok(done) => {
                    let r = monoid_ref_for(&a.file, &gf.monoid_ref, a.output.as_deref());
                    let body = format::print_graph(&r, &done);
                    let text = emit(body.clone(), a.output.as_deref())?;
                    Ok(Report::new(0, text, json!({"completed": true, "graph": body})))
                }
                Err(w) => {
                    let (t, j) = cycle_text(&gf.graph, &w);
                    Ok(Report::new(1, format!("non-metric\n{}", t), json!({"completed": false, "witness": j})))
                }
            }
        }
        GraphCmd::Amalgamate { a, b1, b2, output } => {
            let (ga, g1, g2) = (format::load_graph(a)?, format::load_graph(b1)?, format::load_graph(b2)?);
            let embed = |b: &GraphFile, name: &Path| -> Result<Vec<usize>, CliError> {
                let idx = ga
                    .graph
                    .ids()
                    .iter()
                    .map(|id| {
                        b.graph.index_of(id).ok_or_else(|| {
                            CliError::Syntax(format!("{}: vertex `{}` of the common part is missing", name.display(), id))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                for (i, &x) in idx.iter().enumerate() {
                    for (j, &y) in idx.iter().enumerate() {
                        if i != j && ga.graph.dist(i, j) != b.graph.dist(x, y) {
                            return Err(CliError::Syntax(format!(
                                "{}: the common part does not embed isometrically",
                                name.display()
                            )));
                        }
                    }
                }
                Ok(idx)
            };
            let (e1, e2) = (embed(&g1, b1)?, embed(&g2, b2)?);
            let pairs: Vec<(usize, usize)> = e1.into_iter().zip(e2).collect();
            let am = strong_amalgamation(&g1.graph, &g2.graph, &pairs)?;
            let r = monoid_ref_for(b1, &g1.monoid_ref, output.as_deref());
            let body = format::print_graph(&r, &am.graph);
            let text = emit(body.clone(), output.as_deref())?;
            Ok(Report::new(0, text, json!({"graph": body})))
        }
    }
}

fn order(cmd: &OrderCmd) -> Result<Report, CliError> {
    match cmd {
        OrderCmd::Check { file } => {
            let gf = format::load_graph(file)?;
            let g = &gf.graph;
            match check_convex_order(g)? {
                Verdict::Fails(w) => {
                    let blocks = g.monoid().blocks()?;
                    let text = format!(
                        "not convex\nball: {} of `{}` and `{}` is split by `{}`\n",
                        blocks.describe(g.monoid(), w.block),
                        g.id(w.a),
                        g.id(w.b),
                        g.id(w.c)
                    );
                    let j = json!({"convex": false, "block": blocks.describe(g.monoid(), w.block), "a": g.id(w.a), "b": g.id(w.b), "between": g.id(w.c)});
                    Ok(Report::new(1, text, j))
                }
                _ => Ok(Report::new(0, "convex\n".into(), json!({"convex": true}))),
            }
        }
        OrderCmd::Make(a) => {
            let mut gf = format::load_graph(&a.file)?;
            let order = make_convex_order(&gf.graph)?;
            gf.graph.set_order(order)?;
            let r = monoid_ref_for(&a.file, &gf.monoid_ref, a.output.as_deref());
            let body = format::print_graph(&r, &gf.graph);
            let text = emit(body.clone(), a.output.as_deref())?;
            Ok(Report::new(0, text, json!({"graph": body})))
        }
    }
}

fn lstar(cmd: &LstarCmd) -> Result<Report, CliError> {
    match cmd {
        LstarCmd::Expand(a) => {
            let mut gf = format::load_graph(&a.file)?;
            if gf.graph.order().is_none() {
                let order = make_convex_order(&gf.graph)?;
                gf.graph.set_order(order)?;
            }
            let s = lstar_expand(&gf.graph)?;
            let r = monoid_ref_for(&a.file, &gf.monoid_ref, a.output.as_deref());
            let body = format::print_lstar(&r, &s);
            let text = emit(body.clone(), a.output.as_deref())?;
            Ok(Report::new(0, text, json!({"structure": body})))
        }
        LstarCmd::Validate { file } => {
            let lf = format::load_lstar(file)?;
            let report = validate_lstar(&lf.structure);
            if report.is_valid() {
                return Ok(Report::new(0, "valid\n".into(), json!({"valid": true, "violations": []})));
            }
            let mut text = String::from("invalid\n");
            let mut vs = Vec::new();
            for v in &report.violations {
                let _ = writeln!(text, "violation: {}: {}", v.clause.name(), v.detail);
                vs.push(json!({"clause": v.clause.name(), "detail": v.detail}));
            }
            Ok(Report::new(1, text, json!({"valid": false, "violations": vs})))
        }
        LstarCmd::Complete(a) => {
            let lf = format::load_lstar(&a.file)?;
            match star_completion(&lf.structure)? {
                StarOutcome::Completed(done) => {
                    let r = monoid_ref_for(&a.file, &lf.monoid_ref, a.output.as_deref());
                    let body = format::print_lstar(&r, &done);
                    let text = emit(body.clone(), a.output.as_deref())?;
                    Ok(Report::new(0, text, json!({"completed": true, "structure": body})))
                }
                StarOutcome::NonCompletable { plan, witness } => {
                    let (t, j) = cycle_text(&plan.graph, &witness);
                    let text = format!("non-completable\nwitness-paths: {}\n{}", plan.paths.len(), t);
                    Ok(Report::new(1, text, json!({"completed": false, "witness_paths": plan.paths.len(), "witness": j})))
                }
            }
        }
        LstarCmd::Obstruct(a) => {
            let lf = format::load_lstar(&a.file)?;
            let s = &lf.structure;
            if let StarOutcome::Completed(_) = star_completion(&mmetric::lstar::repair_orphans(s))? {
                return Ok(Report::new(1, "completable\n".into(), json!({"completable": true})));
            }
            let o = extract_obstruction(s)?;
            let m = s.monoid();
            let r = monoid_ref_for(&a.file, &lf.monoid_ref, a.output.as_deref());
            let body = format::print_lstar(&r, &o.structure);
            let summary = format!(
                "size: {}\nbound: {}\nn(S): {}\nviolated: {}\nimportant: {}\n",
                o.structure.len(),
                o.bound,
                o.n_of_s,
                m.label(o.ell),
                labels(m, &o.important).join(" ")
            );
            let out = emit(body.clone(), a.output.as_deref())?;
            let j = json!({"size": o.structure.len(), "bound": o.bound, "n_of_s": o.n_of_s, "violated": m.label(o.ell), "important": labels(m, &o.important), "structure": body});
            Ok(Report::new(0, format!("{}{}", summary, out), j))
        }
    }
}

fn budget(b: &BudgetArgs) -> EnumerationBudget {
    EnumerationBudget { max_vertices: b.budget_vertices, ..EnumerationBudget::default() }
}

fn oracle(cmd: &OracleCmd) -> Result<Report, CliError> {
    match cmd {
        OracleCmd::Completions { file, budget: b } => {
            let gf = format::load_graph(file)?;
            let all = enumerate_completions(&gf.graph, &budget(b))?;
            let mut text = format!("completions: {}\n", all.len());
            let m = gf.graph.monoid();
            let mut js = Vec::new();
            for c in &all {
                let missing: Vec<String> = c
                    .edges()
                    .into_iter()
                    .filter(|&(u, v, _)| gf.graph.dist(u, v).is_none())
                    .map(|(u, v, e)| format!("{}-{}={}", c.id(u), c.id(v), m.label(e)))
                    .collect();
                let _ = writeln!(text, "completion: {}", missing.join(" "));
                js.push(json!(missing));
            }
            Ok(Report::new(if all.is_empty() { 1 } else { 0 }, text, json!({"count": all.len(), "completions": js})))
        }
        OracleCmd::Blocks { file, budget: b } => {
            let m = format::load_monoid(file)?;
            let classes = oracle_blocks(&m, &budget(b))?;
            let names: Vec<String> = classes.iter().map(|c| format!("[{}]", labels(&m, c).join(" "))).collect();
            Ok(Report::new(0, format!("blocks: {}\n", names.join(" ")), json!({"blocks": names})))
        }
        OracleCmd::Fourvalues { values } => {
            let holds = oracle_four_values(&parse_values(values)?);
            let text = format!("four-values: {}\n", if holds { "holds" } else { "fails" });
            Ok(Report::new(if holds { 0 } else { 1 }, text, json!({"holds": holds})))
        }
        OracleCmd::Lstar { file, budget: b } => {
            let lf = format::load_lstar(file)?;
            let ok = oracle_lstar_completable(&lf.structure, &budget(b))?;
            let text = format!("completable: {}\n", if ok { "yes" } else { "no" });
            Ok(Report::new(if ok { 0 } else { 1 }, text, json!({"completable": ok})))
        }
    }
}
