//! `gac`: invariants, classification verdicts, moves and move-path search
//! for graphs with finitely many vertices.
//!
//! Exit codes: 0 success or Equivalent, 1 NotEquivalent (or a path that
//! fails to check), 2 Unknown or an inconclusive search, 3 usage, input or
//! hypothesis errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gac_core::moves::{apply, parse_delay_split, parse_partition, parse_source_out};
use gac_core::search::replay;
use gac_core::{
    cstar_morita_decide, find_move_path, flow_equivalence_decide, invariants_cstar, invariants_leavitt,
    leavitt_morita_decide, AbGroup, Assumptions, ClassifyError, FieldDescriptor, Graph, MoveInstance, MoveKind,
    MovePath, Outcome, SearchOptions, SearchOutcome, Verdict,
};
use serde_json::json;

const EXIT_OK: u8 = 0;
const EXIT_NOT_EQUIVALENT: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "gac", version, about = "K-theoretic classification of graph algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the K-theoretic invariants of a graph.
    Invariants {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Algebra::Cstar)]
        algebra: Algebra,
        /// Field for the Leavitt path algebra: C, R, Q, F_<q>, F_q:<q>,
        /// numberfield:<name>[:roots=<w>] or custom:units=...,nfq=...,numfield=...
        #[arg(long, default_value = "C")]
        field: String,
        #[arg(long)]
        json: bool,
    },
    /// Decide flow or Morita equivalence of two graphs.
    Classify {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum)]
        regime: Regime,
        #[arg(long, default_value = "C")]
        field: String,
        /// K6 of the first algebra (number fields only), e.g. "Z/2 + Z".
        #[arg(long = "k6-a", requires = "k6_b")]
        k6_a: Option<String>,
        #[arg(long = "k6-b", requires = "k6_a")]
        k6_b: Option<String>,
        #[arg(long)]
        assume_simple: bool,
        #[arg(long)]
        assume_purely_infinite: bool,
        #[arg(long)]
        json: bool,
    },
    /// Apply one move and print the resulting graph.
    Move {
        graph: PathBuf,
        /// S, S-1, O, O-1, I, I-1, R, R-1 or CS.
        #[arg(long = "move")]
        kind: String,
        #[arg(long)]
        at: Option<String>,
        /// Partition for O and I, e.g. "e:v->v=1|1;e:v->w=2|0".
        #[arg(long)]
        partition: Option<String>,
        /// Vertices to merge for O-1 and I-1, e.g. "a,b".
        #[arg(long)]
        group: Option<String>,
        /// Edges of the added source for S-1, e.g. "v=1,w=2".
        #[arg(long)]
        out: Option<String>,
        /// Split for R-1, e.g. "u=1|1;w=0|2" (keep|redirect).
        #[arg(long)]
        split: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Search for a sequence of moves turning the first graph into the second.
    Search {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long)]
        json: bool,
        /// Also write the path as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a move path written by `search --out`.
    CheckPath {
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run the built-in example corpus.
    Demo,
}

#[derive(Args, Debug)]
struct Bounds {
    /// Allow one Cuntz splice when the determinant signs differ.
    #[arg(long)]
    allow_cs: bool,
    #[arg(long, default_value_t = 6)]
    max_depth: usize,
    #[arg(long, env = "GAC_MAX_VERTICES", default_value_t = 8)]
    max_vertices: usize,
    #[arg(long, default_value_t = 40)]
    max_total_multiplicity: u64,
    #[arg(long, default_value_t = 3)]
    max_partition_blocks: usize,
    #[arg(long, default_value_t = 1)]
    max_new_mult: u64,
    #[arg(long, default_value_t = 200_000)]
    max_states: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl Bounds {
    fn options(&self) -> SearchOptions {
        SearchOptions {
            max_depth: self.max_depth,
            max_vertices: self.max_vertices,
            max_total_multiplicity: self.max_total_multiplicity,
            max_partition_blocks: self.max_partition_blocks,
            max_new_mult: self.max_new_mult,
            allow_cs: self.allow_cs,
            max_states: self.max_states,
            threads: self.threads,
            ..SearchOptions::default()
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Algebra {
    Cstar,
    Leavitt,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Regime {
    Flow,
    Cstar,
    Leavitt,
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Graph::parse(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn verdict_code(v: &Verdict) -> u8 {
    match v.result {
        Outcome::Equivalent => EXIT_OK,
        Outcome::NotEquivalent => EXIT_NOT_EQUIVALENT,
        Outcome::Unknown => EXIT_UNKNOWN,
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Invariants { graph, algebra, field, json } => {
            let g = read_graph(&graph)?;
            match algebra {
                Algebra::Cstar => {
                    let inv = invariants_cstar(&g);
                    if json { print_json(&inv)? } else { println!("{inv}") }
                }
                Algebra::Leavitt => {
                    let k: FieldDescriptor = field.parse()?;
                    let inv = invariants_leavitt(&g, &k);
                    if json { print_json(&inv)? } else { println!("{inv}") }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Classify { a, b, regime, field, k6_a, k6_b, assume_simple, assume_purely_infinite, json } => {
            let (g, h) = (read_graph(&a)?, read_graph(&b)?);
            let assume = Assumptions { assume_simple, assume_purely_infinite };
            let verdict = match regime {
                Regime::Flow => flow_equivalence_decide(&g, &h),
                Regime::Cstar => cstar_morita_decide(&g, &h, assume),
                Regime::Leavitt => {
                    let k: FieldDescriptor = field.parse()?;
                    let k6 = match (k6_a, k6_b) {
                        (Some(x), Some(y)) => Some((x.parse::<AbGroup>()?, y.parse::<AbGroup>()?)),
                        _ => None,
                    };
                    leavitt_morita_decide(&g, &h, &k, k6.as_ref().map(|(x, y)| (x, y)), assume)
                }
            };
            let verdict = match verdict {
                Ok(v) => v,
                Err(e @ ClassifyError::Hypothesis(_)) | Err(e @ ClassifyError::CrossCheck(_)) => {
                    eprintln!("error: {e}");
                    return Ok(EXIT_USAGE);
                }
            };
            if json { print_json(&verdict)? } else { println!("{verdict}") }
            Ok(verdict_code(&verdict))
        }
        Command::Move { graph, kind, at, partition, group, out, split, json } => {
            let g = read_graph(&graph)?;
            let kind: MoveKind = kind.parse()?;
            let at = || at.clone().ok_or_else(|| anyhow!("--move {kind} needs --at"));
            let m = match kind {
                MoveKind::S => MoveInstance::SourceRemoval { at: at()? },
                MoveKind::R => MoveInstance::Reduction { at: at()? },
                MoveKind::CS => MoveInstance::CuntzSplice { at: at()? },
                MoveKind::O | MoveKind::I => {
                    let v = at()?;
                    let spec = partition.as_deref().ok_or_else(|| anyhow!("--move {kind} needs --partition"))?;
                    let blocks = parse_partition(kind, &v, spec)?;
                    if kind == MoveKind::O {
                        MoveInstance::OutSplit { at: v, blocks }
                    } else {
                        MoveInstance::InSplit { at: v, blocks }
                    }
                }
                MoveKind::OInv | MoveKind::IInv => {
                    let spec = group.as_deref().ok_or_else(|| anyhow!("--move {kind} needs --group"))?;
                    let group: Vec<String> = spec.split(',').map(|s| s.trim().to_string()).collect();
                    if kind == MoveKind::OInv {
                        MoveInstance::OutAmalgamation { group }
                    } else {
                        MoveInstance::InAmalgamation { group }
                    }
                }
                MoveKind::SInv => {
                    let spec = out.as_deref().ok_or_else(|| anyhow!("--move S-1 needs --out"))?;
                    MoveInstance::SourceAddition { out: parse_source_out(spec)? }
                }
                MoveKind::RInv => MoveInstance::Delay {
                    at: at()?,
                    split: parse_delay_split(split.as_deref().unwrap_or(""))?,
                },
            };
            let applied = apply(&g, &m)?;
            if json {
                print_json(&json!({ "move": m, "created": applied.created, "graph": applied.graph }))?;
            } else {
                println!("{}", applied.graph);
            }
            Ok(EXIT_OK)
        }
        Command::Search { a, b, bounds, json, out } => {
            let (g, h) = (read_graph(&a)?, read_graph(&b)?);
            let outcome = find_move_path(&g, &h, &bounds.options())?;
            match &outcome {
                SearchOutcome::Found(p) => {
                    if let Some(file) = &out {
                        fs::write(file, serde_json::to_string_pretty(p)?)
                            .with_context(|| format!("cannot write {}", file.display()))?;
                    }
                    if json {
                        print_json(&json!({ "found": true, "path": p }))?;
                    } else {
                        println!("{outcome}");
                    }
                    Ok(EXIT_OK)
                }
                SearchOutcome::Inconclusive { explored, reason } => {
                    if json {
                        print_json(&json!({
                            "found": false,
                            "status": "inconclusive at bounds",
                            "reason": reason,
                            "explored": explored,
                        }))?;
                    } else {
                        println!("{outcome}");
                    }
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Command::CheckPath { path, json } => {
            let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
            let p: MovePath = serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))?;
            let (ok, message) = match replay(&p) {
                Err((i, e)) => (false, format!("step {}: {e}", i + 1)),
                Ok(last) if gac_core::canon::find_isomorphism(&last, &p.end).is_none() => {
                    (false, "final graph is not isomorphic to the stated end".to_string())
                }
                Ok(_) => (true, format!("{} steps replayed", p.steps.len())),
            };
            if json {
                print_json(&json!({ "valid": ok, "message": message }))?;
            } else {
                println!("{}: {message}", if ok { "valid" } else { "invalid" });
            }
            Ok(if ok { EXIT_OK } else { EXIT_NOT_EQUIVALENT })
        }
        Command::Demo => demo(),
    }
}

const E2: &str = include_str!("../data/e2.txt");
const E2_SPLICED: &str = include_str!("../data/e2cs.txt");
const EXAMPLE: &str = include_str!("../data/example4.txt");
const SQUARE: &str = include_str!("../data/square.txt");
const INF_LOOPS: &str = include_str!("../data/inf_loops.txt");
const INF_PAIR: &str = include_str!("../data/inf_pair.txt");

fn cuntz(n: u64) -> Graph {
    Graph::parse(&format!("vertices: v\nedge v v {n}")).expect("valid graph")
}

fn demo() -> Result<u8> {
    let parse = |s: &str| Graph::parse(s).expect("bundled graph");
    let (e2, e2s, example, square) = (parse(E2), parse(E2_SPLICED), parse(EXAMPLE), parse(SQUARE));
    let (inf_loops, inf_pair) = (parse(INF_LOOPS), parse(INF_PAIR));
    let none = Assumptions::default();

    println!("== Cuntz algebras O_n (one vertex, n loops)");
    for n in 2..=8 {
        println!("O_{n}: {}", invariants_cstar(&cuntz(n)));
    }
    let distinct = (2..=8u64)
        .flat_map(|m| (m + 1..=8).map(move |n| (m, n)))
        .all(|(m, n)| {
            cstar_morita_decide(&cuntz(m), &cuntz(n), none).is_ok_and(|v| v.result == Outcome::NotEquivalent)
        });
    println!("pairwise NotEquivalent for n = 2..8: {distinct}");

    println!("\n== E_2 and its Cuntz splice");
    println!("E_2:   {}", invariants_cstar(&e2));
    println!("E_2^-: {}", invariants_cstar(&e2s));
    println!("C*-algebras: {}", cstar_morita_decide(&e2, &e2s, none)?);
    let c = FieldDescriptor::complex();
    println!("Leavitt path algebras over C: {}", leavitt_morita_decide(&e2, &e2s, &c, None, none)?);

    println!("\n== Cuntz splice on the two-vertex example");
    let spliced = gac_core::apply_move(&example, &MoveInstance::CuntzSplice { at: "u".into() })?;
    println!("before: {} vertices, {} edges", example.len(), example.edge_count());
    println!("after:  {} vertices, {} edges", spliced.len(), spliced.edge_count());

    println!("\n== Infinite emitters");
    println!("one vertex, inf loops:  {}", invariants_cstar(&inf_loops));
    println!("v inf-> w, w 2-> v:     {}", invariants_cstar(&inf_pair));
    println!("C*-algebras: {}", cstar_morita_decide(&inf_loops, &inf_pair, none)?);
    println!("Leavitt path algebras over C: {}", leavitt_morita_decide(&inf_loops, &inf_pair, &c, None, none)?);

    println!("\n== Move path from E_2 to its outsplit");
    let outcome = find_move_path(&e2, &square, &SearchOptions::default())?;
    println!("{outcome}");
    if outcome.path().is_none() {
        bail!("the bundled search example was not found");
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
