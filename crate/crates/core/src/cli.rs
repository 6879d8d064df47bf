//! The `atom` command line.
//!
//! Machine-readable results go to standard output as `key=value` lines;
//! diagnostics go to standard error. Exit codes:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success                                   |
//! | 1    | infeasible, or verification failed        |
//! | 2    | time limit exceeded                       |
//! | 3    | input error (flags, files, graph, config) |

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Parser, Subcommand};

use crate::bench::{self, parse_grid, CaseStatus, GraphModel, SweepSpec};
use crate::chimera::ChimeraTopology;
use crate::embedding::EmbeddingDoc;
use crate::engine::{embed, EngineConfig, EngineError};
use crate::graph::LogicalGraph;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_TIMEOUT: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "atom", version, about = "Adaptive-topology minor embedding into Chimera hardware graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random logical graph as an edge list.
    Gen {
        /// ba_star, ba_complete or regular
        #[arg(long)]
        model: GraphModel,
        #[arg(long)]
        nodes: usize,
        /// Average degree (BA models) or exact degree (regular).
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed an edge-list graph.
    Embed {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 4)]
        shore: usize,
        /// Seed subgraph size (default: min(2 * shore, nodes)).
        #[arg(long)]
        k: Option<usize>,
        /// Starting grid as RxC.
        #[arg(long, value_parser = parse_grid)]
        initial_topology: Option<(usize, usize)>,
        /// Largest allowed grid as RxC.
        #[arg(long, value_parser = parse_grid)]
        max_topology: Option<(usize, usize)>,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        out_embedding: Option<PathBuf>,
        #[arg(long)]
        out_report: Option<PathBuf>,
    },
    /// Check an embedding JSON file against a graph.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        embedding: PathBuf,
        /// Require this topology, as RxCxS.
        #[arg(long, value_parser = parse_topology)]
        topology: Option<ChimeraTopology>,
    },
    /// Run a sweep of generated instances.
    Bench {
        /// key = value sweep file (default: the desk sweep).
        #[arg(long)]
        sweep_spec: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn parse_topology(value: &str) -> Result<ChimeraTopology, String> {
    let parts: Vec<usize> = value
        .split(['x', 'X'])
        .map(|s| s.trim().parse::<usize>().map_err(|e| format!("{value:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [n, m, c] => ChimeraTopology::new(n, m, c).map_err(|e| e.to_string()),
        _ => Err(format!("expected RxCxS, got {value:?}")),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = write!(err, "{e}");
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
        }
    };
    let result = match cli.command {
        Command::Gen {
            model,
            nodes,
            degree,
            seed,
            out: path,
        } => cmd_gen(model, nodes, degree, seed, &path, out),
        Command::Embed {
            input,
            shore,
            k,
            initial_topology,
            max_topology,
            time_limit,
            out_embedding,
            out_report,
        } => {
            let time_limit = match time_limit.map(Duration::try_from_secs_f64).transpose() {
                Ok(t) => t,
                Err(e) => {
                    let _ = writeln!(err, "error: --time-limit: {e}");
                    return EXIT_INPUT;
                }
            };
            let config = EngineConfig {
                shore,
                k,
                initial_topology,
                max_topology,
                time_limit,
                ..EngineConfig::default()
            };
            cmd_embed(&input, &config, out_embedding, out_report, out, err)
        }
        Command::Verify {
            graph,
            embedding,
            topology,
        } => cmd_verify(&graph, &embedding, topology, out, err),
        Command::Bench {
            sweep_spec,
            parallel,
            csv,
            json,
        } => cmd_bench(sweep_spec, parallel, csv, json, out, err),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, message)) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

struct Failure(i32, String);

fn input_error(e: impl std::fmt::Display) -> Failure {
    Failure(EXIT_INPUT, e.to_string())
}

type CmdResult = Result<i32, Failure>;

fn cmd_gen(
    model: GraphModel,
    nodes: usize,
    degree: usize,
    seed: u64,
    path: &PathBuf,
    out: &mut dyn Write,
) -> CmdResult {
    let graph = model.generate(nodes, degree, seed).map_err(input_error)?;
    graph.save_edge_list(path).map_err(input_error)?;
    let _ = writeln!(out, "nodes={}\nedges={}", graph.num_nodes(), graph.num_edges());
    Ok(EXIT_OK)
}

fn cmd_embed(
    input: &PathBuf,
    config: &EngineConfig,
    out_embedding: Option<PathBuf>,
    out_report: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let graph = LogicalGraph::load_edge_list(input).map_err(input_error)?;
    let outcome = match embed(&graph, config) {
        Ok(o) => o,
        Err(e @ EngineError::Timeout { .. }) => {
            let _ = writeln!(out, "feasible=false\nreason=timeout");
            return Err(Failure(EXIT_TIMEOUT, e.to_string()));
        }
        Err(e @ EngineError::TopologyCap { .. }) => {
            let _ = writeln!(out, "feasible=false\nreason=topology_cap");
            return Err(Failure(EXIT_INFEASIBLE, format!("infeasible at this size: {e}")));
        }
        Err(e @ EngineError::Internal(_)) => return Err(Failure(EXIT_INFEASIBLE, e.to_string())),
        Err(e) => return Err(input_error(e)),
    };
    let check = outcome.embedding.verify(&graph).map_err(input_error)?;
    if !check.feasible {
        let _ = writeln!(out, "feasible=false\nreason=verification_failed");
        for v in &check.violations {
            let _ = writeln!(err, "{v}");
        }
        return Err(Failure(EXIT_INFEASIBLE, "engine output failed verification".into()));
    }
    if let Some(path) = out_embedding {
        outcome.embedding.to_doc().save(path).map_err(input_error)?;
    }
    if let Some(path) = out_report {
        std::fs::write(path, outcome.report.to_json()).map_err(input_error)?;
    }
    let r = &outcome.report;
    let enclosing = r
        .min_enclosing
        .map_or_else(String::new, |t| format!("{}x{}x{}", t.rows(), t.cols(), t.shore()));
    let _ = writeln!(
        out,
        "feasible=true\nnodes={}\nedges={}\ntopology={}x{}x{}\nenclosing={enclosing}\nqubits={}\nseconds={:.6}\n\
         iterations={}\nexpansions={}\nmax_chain={}",
        r.num_nodes,
        r.num_edges,
        r.topology.rows(),
        r.topology.cols(),
        r.topology.shore(),
        r.qubits_used,
        r.wall_time,
        r.iterations,
        r.expansions,
        r.max_chain_length,
    );
    let _ = writeln!(err, "embedded {} nodes on {} using {} qubits", r.num_nodes, r.topology, r.qubits_used);
    Ok(EXIT_OK)
}

fn cmd_verify(
    graph_path: &PathBuf,
    embedding_path: &PathBuf,
    topology: Option<ChimeraTopology>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let graph = LogicalGraph::load_edge_list(graph_path).map_err(input_error)?;
    let doc = EmbeddingDoc::load(embedding_path).map_err(input_error)?;
    let summary = bench::summarize_doc(&doc, &graph, topology).map_err(input_error)?;
    let _ = writeln!(
        out,
        "feasible={}\nviolations={}\nqubits={}",
        summary.report.feasible,
        summary.report.violations.len(),
        summary.qubits
    );
    for v in &summary.report.violations {
        let _ = writeln!(out, "violation={v}");
    }
    if summary.report.feasible {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(err, "embedding is infeasible");
        Ok(EXIT_INFEASIBLE)
    }
}

fn cmd_bench(
    sweep_spec: Option<PathBuf>,
    parallel: usize,
    csv: Option<PathBuf>,
    json: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let spec = match sweep_spec {
        Some(path) => SweepSpec::load(path).map_err(input_error)?,
        None => SweepSpec::desk(),
    };
    let cases = spec.cases();
    let _ = writeln!(err, "running {} cases on {} workers", cases.len(), parallel.max(1));
    let records = bench::run_sweep(&cases, parallel);
    if let Some(path) = csv {
        bench::emit_csv(&records, path).map_err(input_error)?;
    }
    if let Some(path) = json {
        bench::emit_json(&records, path).map_err(input_error)?;
    }
    let count = |s: CaseStatus| records.iter().filter(|r| r.status == s).count();
    let failures = count(CaseStatus::VerificationFailed);
    let _ = writeln!(
        out,
        "cases={}\nfeasible={}\ntimeouts={}\ninfeasible={}\nerrors={}\nverification_failures={failures}",
        records.len(),
        count(CaseStatus::Ok),
        count(CaseStatus::Timeout),
        count(CaseStatus::Infeasible),
        count(CaseStatus::Error),
    );
    Ok(if failures > 0 { EXIT_INFEASIBLE } else { EXIT_OK })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("atom").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_flag_is_input_error() {
        assert_eq!(run_args(&["gen", "--bogus"]).0, EXIT_INPUT);
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_INPUT);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn topology_flag() {
        assert_eq!(parse_topology("2x3x4"), Ok(ChimeraTopology::new(2, 3, 4).unwrap()));
        assert!(parse_topology("2x3").is_err());
        assert!(parse_topology("0x3x4").is_err());
    }

    #[test]
    fn missing_input_file() {
        let (code, _, err) = run_args(&["embed", "--in", "/nonexistent/graph.txt"]);
        assert_eq!(code, EXIT_INPUT);
        assert!(err.starts_with("error:"));
    }
}
