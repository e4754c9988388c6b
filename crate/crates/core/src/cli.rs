//! Command-line front end. Results go to stdout as JSON; `-v` adds a short
//! human summary on stderr.
//!
//! Exit codes: 0 success, 1 property false or plan divergence, 2 invalid
//! input or failed precondition.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::enumerator::{enumerate_min_persistent, random_min_persistent};
use crate::error::Error;
use crate::graph::DirectedGraph;
use crate::persistence::check_min_persistent;
use crate::sequencer::{
    construct_from_seed, decompose_a, decompose_t, transform_general, transform_same_underlying,
    OpSet, Plan, PlanJson,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "minper", version, about = "Minimally persistent graph toolkit")]
struct Args {
    /// Print a human-readable summary to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report rigidity and minimal persistence of a graph.
    Check { graph: PathBuf },
    /// Reduce a graph to a leader-follower seed.
    Decompose {
        #[arg(long, value_enum, default_value_t = Mode::A)]
        mode: Mode,
        graph: PathBuf,
    },
    /// Build a graph from a leader-follower seed.
    Construct { graph: PathBuf },
    /// Plan a transformation from one graph to another.
    Transform {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = TransformMode::General)]
        mode: TransformMode,
        /// Operation set for general transformations.
        #[arg(long, value_enum, default_value_t = Mode::A)]
        ops: Mode,
    },
    /// Print every minimally persistent graph on n vertices as NDJSON.
    Enumerate { n: usize },
    /// Print a random minimally persistent graph.
    Random { n: usize, seed: u64 },
    /// Re-execute a stored plan and verify every step.
    Replay { planfile: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "T", alias = "t")]
    T,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TransformMode {
    General,
    SameUnderlying,
}

/// Failure carrying the exit code it maps to.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Diverged { .. } => EXIT_FALSE,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: e.to_string(),
        }
    }
}

fn invalid(message: String) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message,
    }
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&args, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(args: &Args, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let verbose = args.verbose;
    match &args.command {
        Command::Check { graph } => {
            let g = read_graph(graph)?;
            let report = check_min_persistent(&g)?;
            emit(out, &report)?;
            if verbose {
                match &report.violation {
                    None => writeln!(err, "minimally persistent; dof {:?}", report.dof.0)?,
                    Some(v) => writeln!(err, "not minimally persistent: {v}")?,
                }
            }
            Ok(if report.is_minimally_persistent {
                EXIT_OK
            } else {
                EXIT_FALSE
            })
        }
        Command::Decompose { mode, graph } => {
            let g = read_graph(graph)?;
            let plan = match mode {
                Mode::A => decompose_a(&g)?,
                Mode::T => decompose_t(&g)?,
            };
            emit_plan(out, err, &plan, verbose)
        }
        Command::Construct { graph } => {
            let g = read_graph(graph)?;
            emit_plan(out, err, &construct_from_seed(&g)?, verbose)
        }
        Command::Transform { a, b, mode, ops } => {
            let ga = read_graph(a)?;
            let gb = read_graph(b)?;
            let plan = match mode {
                TransformMode::SameUnderlying => transform_same_underlying(&ga, &gb)?,
                TransformMode::General => {
                    let set = match ops {
                        Mode::A => OpSet::A,
                        Mode::T => OpSet::T,
                    };
                    transform_general(&ga, &gb, set)?
                }
            };
            emit_plan(out, err, &plan, verbose)
        }
        Command::Enumerate { n } => {
            let corpus = enumerate_min_persistent(*n)?;
            let mut buf = std::io::BufWriter::new(&mut *out);
            corpus.write_ndjson(&mut buf)?;
            buf.flush()?;
            drop(buf);
            if verbose {
                writeln!(
                    err,
                    "n={}: {} minimally rigid, {} minimally persistent, {} stuck",
                    n,
                    corpus.rigid_count,
                    corpus.len(),
                    corpus.stuck_count()
                )?;
            }
            Ok(EXIT_OK)
        }
        Command::Random { n, seed } => {
            let g = random_min_persistent(*n, *seed)?;
            emit(out, &g)?;
            if verbose {
                writeln!(
                    err,
                    "{} vertices, {} edges",
                    g.vertex_count(),
                    g.edge_count()
                )?;
            }
            Ok(EXIT_OK)
        }
        Command::Replay { planfile } => replay(planfile, out, err, verbose),
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ReplayResult {
    ok: bool,
    steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    failed_step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

fn replay(
    path: &Path,
    out: &mut dyn Write,
    err: &mut dyn Write,
    verbose: bool,
) -> Result<i32, Failure> {
    let text = read_text(path)?;
    let json: PlanJson =
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let steps = json.steps.len();
    let outcome = match check_min_persistent(&json.initial) {
        Ok(r) => match r.violation {
            Some(v) => Err(Error::Diverged {
                step: 0,
                reason: v.to_string(),
            }),
            None => Plan::from_json(&json).map(|_| ()),
        },
        Err(e) => Err(Error::Diverged {
            step: 0,
            reason: e.to_string(),
        }),
    };
    match outcome {
        Ok(()) => {
            emit(
                out,
                &ReplayResult {
                    ok: true,
                    steps,
                    failed_step: None,
                    reason: None,
                },
            )?;
            if verbose {
                writeln!(err, "replayed {steps} steps")?;
            }
            Ok(EXIT_OK)
        }
        Err(Error::Diverged { step, reason }) => {
            emit(
                out,
                &ReplayResult {
                    ok: false,
                    steps,
                    failed_step: Some(step),
                    reason: Some(reason.clone()),
                },
            )?;
            writeln!(err, "plan diverges at step {step}: {reason}")?;
            Ok(EXIT_FALSE)
        }
        Err(e) => Err(e.into()),
    }
}

fn emit_plan(
    out: &mut dyn Write,
    err: &mut dyn Write,
    plan: &Plan,
    verbose: bool,
) -> Result<i32, Failure> {
    emit(out, &plan.to_json())?;
    if verbose {
        writeln!(err, "{} steps", plan.len())?;
        for op in &plan.steps {
            writeln!(err, "  {op}")?;
        }
    }
    Ok(EXIT_OK)
}

fn emit(out: &mut dyn Write, value: &impl Serialize) -> Result<(), Failure> {
    serde_json::to_writer(&mut *out, value).map_err(|e| invalid(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// Reads graph JSON, or a plain edge list when the file does not start
/// with `{`.
fn read_graph(path: &Path) -> Result<DirectedGraph, Failure> {
    let text = read_text(path)?;
    let parsed = if text.trim_start().starts_with('{') {
        serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
    } else {
        parse_edge_list(&text)
    };
    parsed.map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// One directed edge `u v` per line; a lone id declares an isolated vertex.
/// `#` starts a comment.
pub fn parse_edge_list(text: &str) -> crate::Result<DirectedGraph> {
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let ids = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", k + 1)))?;
        match ids[..] {
            [v] => vertices.push(v),
            [u, v] => edges.push((u, v)),
            _ => return Err(Error::Parse(format!("line {}: expected `u v`", k + 1))),
        }
    }
    let mut g = DirectedGraph::from_edges(edges)?;
    for v in vertices {
        if !g.contains_vertex(v) {
            g.add_vertex(v)?;
        }
    }
    Ok(g)
}
