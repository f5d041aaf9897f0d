//! Command-line front end. Reports are `key: value` lines on stdout; diagnostics go to stderr.

use std::fmt::Write as _;
use std::fs;

use clap::{Args, Parser, Subcommand};

use crate::deciders::{decide, recognize_family, Decision};
use crate::graph::{Graph, ISO_GUARD};
use crate::invariants::{bowen_franks, gauge_family_invariant, k_data, temperature};
use crate::moves::{apply_trace, MoveTrace, Relation};
use crate::search::{bfs_connect, verify_trace, SearchBudget, SearchError, SearchOutcome};
use crate::standard_forms::{reduce, FormError, FormKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_PARSE: i32 = 65;
pub const EXIT_BUDGET: i32 = 70;
pub const EXIT_BREACH: i32 = 80;

#[derive(Parser, Debug)]
#[command(
    name = "graphmoves",
    version,
    about = "Moves, invariants and certified equivalence traces for graph algebras"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Limits {
    /// Largest input graph accepted.
    #[arg(long, default_value_t = ISO_GUARD)]
    pub max_vertices: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// K-theory, Bowen–Franks data, temperature and family data of a graph.
    Invariants {
        graph: String,
        #[command(flatten)]
        limits: Limits,
    },
    /// Replays a move script and prints the resulting graph.
    Apply {
        graph: String,
        script: String,
        #[arg(short = 'o')]
        output: Option<String>,
        #[command(flatten)]
        limits: Limits,
    },
    /// Brings a graph to a standard form.
    Reduce {
        graph: String,
        #[arg(long)]
        form: FormKind,
        #[arg(short = 'o')]
        output: Option<String>,
        #[arg(long)]
        trace: Option<String>,
        #[command(flatten)]
        limits: Limits,
    },
    /// Decides equivalence at a relation, with a replayable trace when equivalent.
    Decide {
        first: String,
        second: String,
        #[arg(long)]
        rel: Relation,
        #[arg(long)]
        trace: Option<String>,
        #[command(flatten)]
        limits: Limits,
    },
    /// Bounded breadth-first search for a connecting trace.
    Search {
        first: String,
        second: String,
        #[arg(long)]
        rel: Relation,
        #[arg(long, default_value_t = SearchBudget::default().max_depth)]
        depth: usize,
        #[arg(long, default_value_t = SearchBudget::default().max_states)]
        states: usize,
        #[arg(long, default_value_t = SearchBudget::default().max_parts)]
        parts: usize,
        #[arg(long, default_value_t = SearchBudget::default().max_fanout)]
        fanout: usize,
        #[arg(long)]
        trace: Option<String>,
        #[command(flatten)]
        limits: Limits,
    },
    /// Checks that a script leads from one graph to the other using allowed moves.
    Verify {
        first: String,
        script: String,
        second: String,
        #[arg(long)]
        rel: Relation,
        #[command(flatten)]
        limits: Limits,
    },
}

/// Exit code with the text destined for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Fail(i32, String);

type Res<T> = Result<T, Fail>;

fn read(path: &str) -> Res<String> {
    fs::read_to_string(path).map_err(|e| Fail(EXIT_PARSE, format!("cannot read `{path}`: {e}")))
}

fn load_graph(path: &str, limits: &Limits) -> Res<Graph> {
    let g = Graph::parse(&read(path)?).map_err(|e| Fail(EXIT_PARSE, format!("{path}: {e}")))?;
    if g.n() > limits.max_vertices {
        return Err(Fail(
            EXIT_BUDGET,
            format!("{path}: {} vertices exceed --max-vertices {}", g.n(), limits.max_vertices),
        ));
    }
    Ok(g)
}

fn load_trace(path: &str) -> Res<MoveTrace> {
    MoveTrace::parse(&read(path)?).map_err(|e| Fail(EXIT_PARSE, format!("{path}: {e}")))
}

fn write(path: &str, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|e| Fail(EXIT_PARSE, format!("cannot write `{path}`: {e}")))
}

fn trace_block(out: &mut String, t: &MoveTrace) {
    let _ = writeln!(out, "steps: {}", t.len());
    let _ = writeln!(out, "class: {}", t.class());
    out.push_str("trace:\n");
    for line in t.to_script().lines() {
        let _ = writeln!(out, "  {line}");
    }
}

fn invariants(g: &Graph) -> String {
    let mut out = String::new();
    let k = k_data(g);
    let _ = writeln!(out, "graph: {}", g.name());
    let _ = writeln!(out, "vertices: {}", g.n());
    let _ = writeln!(out, "k0: {}", k.k0);
    let _ = writeln!(out, "unit: {}", k.unit);
    let _ = writeln!(out, "unit-order: {}", k.unit_order().map_or("infinite".into(), |o| o.to_string()));
    let _ = writeln!(out, "k1-rank: {}", k.k1_rank);
    match bowen_franks(g) {
        Ok(bf) => {
            let _ = writeln!(out, "bf: {}", bf.group);
            let _ = writeln!(out, "bf-sign: {}", bf.det_sign);
        }
        Err(e) => {
            let _ = writeln!(out, "bf: n/a ({e})");
        }
    }
    let _ = writeln!(out, "gauge-simple: {}", g.is_gauge_simple());
    match temperature(g) {
        Ok(t) => {
            let _ = writeln!(out, "temperature: {t}");
        }
        Err(_) => out.push_str("temperature: n/a\n"),
    }
    if let Some(inv) = gauge_family_invariant(g) {
        let _ = writeln!(out, "gauge-invariant: {inv}");
    }
    let _ = writeln!(out, "family: {}", recognize_family(g));
    out
}

fn execute(cmd: Command, err: &mut String) -> Res<(i32, String)> {
    let mut out = String::new();
    let code = match cmd {
        Command::Invariants { graph, limits } => {
            out = invariants(&load_graph(&graph, &limits)?);
            EXIT_OK
        }
        Command::Apply { graph, script, output, limits } => {
            let g = load_graph(&graph, &limits)?;
            let t = load_trace(&script)?;
            let end = apply_trace(&g, &t).map_err(|e| Fail(EXIT_NEGATIVE, e.to_string()))?;
            let _ = writeln!(out, "steps: {}", t.len());
            let _ = writeln!(out, "class: {}", t.class());
            match output {
                Some(p) => write(&p, &end.to_text())?,
                None => out.push_str(&end.to_text()),
            }
            EXIT_OK
        }
        Command::Reduce { graph, form, output, trace, limits } => {
            let g = load_graph(&graph, &limits)?;
            let (end, t) = reduce(&g, form).map_err(|e| match e {
                FormError::Guard(_) => Fail(EXIT_BUDGET, e.to_string()),
                FormError::Invariant(_) => Fail(EXIT_BREACH, e.to_string()),
                _ => Fail(EXIT_NEGATIVE, e.to_string()),
            })?;
            let _ = writeln!(out, "form: {form}");
            let _ = writeln!(out, "family: {}", recognize_family(&end));
            trace_block(&mut out, &t);
            if let Some(p) = trace {
                write(&p, &t.to_script())?;
            }
            match output {
                Some(p) => write(&p, &end.to_text())?,
                None => out.push_str(&end.to_text()),
            }
            EXIT_OK
        }
        Command::Decide { first, second, rel, trace, limits } => {
            let (g, h) = (load_graph(&first, &limits)?, load_graph(&second, &limits)?);
            let d = decide(&g, &h, rel);
            let _ = writeln!(out, "relation: {rel}");
            let _ = writeln!(out, "verdict: {}", d.verdict());
            match d {
                Decision::Equivalent(t) => {
                    trace_block(&mut out, &t);
                    if let Some(p) = trace {
                        write(&p, &t.to_script())?;
                    }
                    EXIT_OK
                }
                Decision::Distinguished(w) => {
                    let _ = writeln!(out, "witness: {w}");
                    EXIT_NEGATIVE
                }
                Decision::Unknown(reason) => {
                    let _ = writeln!(out, "reason: {reason}");
                    EXIT_UNKNOWN
                }
            }
        }
        Command::Search { first, second, rel, depth, states, parts, fanout, trace, limits } => {
            let (g, h) = (load_graph(&first, &limits)?, load_graph(&second, &limits)?);
            let budget = SearchBudget {
                max_depth: depth,
                max_states: states,
                max_parts: parts,
                max_fanout: fanout,
                max_vertices: limits.max_vertices,
            };
            let outcome = bfs_connect(&g, &h, rel, &budget).map_err(|e| match e {
                SearchError::InvariantBreach { .. } => Fail(EXIT_BREACH, e.to_string()),
                SearchError::BadBudget => Fail(EXIT_USAGE, e.to_string()),
                SearchError::Graph(_) => Fail(EXIT_BUDGET, e.to_string()),
            })?;
            let _ = writeln!(out, "relation: {rel}");
            match outcome {
                SearchOutcome::Found(t) => {
                    out.push_str("outcome: found\n");
                    trace_block(&mut out, &t);
                    if let Some(p) = trace {
                        write(&p, &t.to_script())?;
                    }
                    EXIT_OK
                }
                SearchOutcome::Closed => {
                    out.push_str("outcome: closed\n");
                    EXIT_UNKNOWN
                }
                SearchOutcome::BudgetExhausted { depth, states } => {
                    out.push_str("outcome: budget-exhausted\n");
                    let _ = writeln!(out, "depth: {depth}");
                    let _ = writeln!(out, "states: {states}");
                    EXIT_BUDGET
                }
            }
        }
        Command::Verify { first, script, second, rel, limits } => {
            let (g, h) = (load_graph(&first, &limits)?, load_graph(&second, &limits)?);
            let t = load_trace(&script)?;
            let v = verify_trace(&g, &t, &h, rel);
            let _ = writeln!(out, "relation: {rel}");
            let _ = writeln!(out, "steps: {}", t.len());
            let _ = writeln!(out, "verified: {}", v.ok);
            for d in &v.diagnostics {
                let _ = writeln!(out, "diagnostic: {d}");
                let _ = writeln!(err, "{d}");
            }
            if v.ok {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            }
        }
    };
    Ok((code, out))
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let mut stderr = String::new();
    match execute(cli.command, &mut stderr) {
        Ok((code, stdout)) => Outcome { code, stdout, stderr },
        Err(Fail(code, msg)) => {
            stderr.push_str(&msg);
            stderr.push('\n');
            Outcome { code, stdout: String::new(), stderr }
        }
    }
}
