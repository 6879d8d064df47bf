//! Instance sweeps: generate graphs, embed them under a time limit,
//! re-verify every result and emit one record per case.

use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chimera::ChimeraTopology;
use crate::embedding::{self, EmbeddingDoc, EmbeddingError, FeasibilityReport};
use crate::engine::{embed, EngineConfig, EngineError};
use crate::graph::{gen_ba_complete, gen_ba_star, gen_regular, GraphError, LogicalGraph};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("sweep spec line {line}: {message}")]
    Spec { line: usize, message: String },
    #[error("no records to write")]
    NoRecords,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphModel {
    BaStar,
    BaComplete,
    Regular,
}

impl GraphModel {
    pub const ALL: [GraphModel; 3] = [Self::BaStar, Self::BaComplete, Self::Regular];

    pub fn name(self) -> &'static str {
        match self {
            Self::BaStar => "ba_star",
            Self::BaComplete => "ba_complete",
            Self::Regular => "regular",
        }
    }

    pub fn generate(self, num_nodes: usize, d: usize, seed: u64) -> Result<LogicalGraph, GraphError> {
        match self {
            Self::BaStar => gen_ba_star(num_nodes, d, seed),
            Self::BaComplete => gen_ba_complete(num_nodes, d, seed),
            Self::Regular => gen_regular(num_nodes, d, seed),
        }
    }
}

impl std::fmt::Display for GraphModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GraphModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown model {s:?} (expected ba_star, ba_complete or regular)"))
    }
}

/// One instance of a sweep. Fully determines its record apart from timing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchCase {
    pub model: GraphModel,
    pub num_nodes: usize,
    pub degree: usize,
    pub seed: u64,
    pub config: EngineConfig,
    pub time_limit: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseStatus {
    Ok,
    Timeout,
    /// The topology cap was hit.
    Infeasible,
    /// The engine returned an embedding the verifier rejected.
    VerificationFailed,
    /// Generator or configuration error.
    Error,
}

/// One CSV row. Column order is the field order below and is stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub model: GraphModel,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub feasible: bool,
    pub status: CaseStatus,
    pub seconds: f64,
    pub qubits: Option<usize>,
    pub topo_n: Option<usize>,
    pub topo_m: Option<usize>,
    pub topo_c: usize,
    pub enclosing_n: Option<usize>,
    pub enclosing_m: Option<usize>,
    pub iterations: Option<usize>,
    pub expansions: Option<usize>,
    pub max_chain: Option<usize>,
    pub edges: Option<usize>,
}

impl BenchRecord {
    fn failed(case: &BenchCase, status: CaseStatus, seconds: f64, edges: Option<usize>) -> Self {
        Self {
            model: case.model,
            n: case.num_nodes,
            d: case.degree,
            seed: case.seed,
            feasible: false,
            status,
            seconds,
            qubits: None,
            topo_n: None,
            topo_m: None,
            topo_c: case.config.shore,
            enclosing_n: None,
            enclosing_m: None,
            iterations: None,
            expansions: None,
            max_chain: None,
            edges,
        }
    }

    /// Copy with the timing column zeroed, for run-to-run comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            seconds: 0.0,
            ..self.clone()
        }
    }
}

/// Generates, embeds and independently re-verifies one case.
pub fn run_case(case: &BenchCase) -> BenchRecord {
    let start = Instant::now();
    let graph = match case.model.generate(case.num_nodes, case.degree, case.seed) {
        Ok(g) => g,
        Err(_) => return BenchRecord::failed(case, CaseStatus::Error, 0.0, None),
    };
    let edges = Some(graph.num_edges());
    let config = EngineConfig {
        time_limit: Some(case.time_limit),
        ..case.config.clone()
    };
    let outcome = match embed(&graph, &config) {
        Ok(out) => out,
        Err(err) => {
            let status = match err {
                EngineError::Timeout { .. } => CaseStatus::Timeout,
                EngineError::TopologyCap { .. } => CaseStatus::Infeasible,
                _ => CaseStatus::Error,
            };
            return BenchRecord::failed(case, status, start.elapsed().as_secs_f64(), edges);
        }
    };
    let seconds = outcome.report.wall_time;
    let verified = outcome
        .embedding
        .verify(&graph)
        .map(|r| r.feasible)
        .unwrap_or(false);
    if !verified {
        return BenchRecord::failed(case, CaseStatus::VerificationFailed, seconds, edges);
    }
    let report = &outcome.report;
    BenchRecord {
        feasible: true,
        status: CaseStatus::Ok,
        qubits: Some(report.qubits_used),
        topo_n: Some(report.topology.rows()),
        topo_m: Some(report.topology.cols()),
        enclosing_n: report.min_enclosing.map(|t| t.rows()),
        enclosing_m: report.min_enclosing.map(|t| t.cols()),
        iterations: Some(report.iterations),
        expansions: Some(report.expansions),
        max_chain: Some(report.max_chain_length),
        ..BenchRecord::failed(case, CaseStatus::Ok, seconds, edges)
    }
}

/// Runs every case on a pool of `parallelism` workers. Records come back in
/// case order whatever the pool size.
pub fn run_sweep(cases: &[BenchCase], parallelism: usize) -> Vec<BenchRecord> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| cases.par_iter().map(run_case).collect())
}

pub fn write_csv<W: std::io::Write>(records: &[BenchRecord], out: W) -> Result<(), BenchError> {
    if records.is_empty() {
        return Err(BenchError::NoRecords);
    }
    let mut writer = csv::Writer::from_writer(out);
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[BenchRecord], path: impl AsRef<Path>) -> Result<(), BenchError> {
    write_csv(records, std::fs::File::create(path)?)
}

pub fn emit_json(records: &[BenchRecord], path: impl AsRef<Path>) -> Result<(), BenchError> {
    if records.is_empty() {
        return Err(BenchError::NoRecords);
    }
    let mut text = serde_json::to_string_pretty(records)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_json(path: impl AsRef<Path>) -> Result<Vec<BenchRecord>, BenchError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// A sweep as the cartesian product models x nodes x degrees x seeds.
///
/// Text form, one `key = value` per line, `#` comments allowed:
///
/// ```text
/// models = ba_star, ba_complete, regular
/// nodes = 100, 200, 400
/// degrees = 10, 20
/// seeds = 1, 2, 3
/// time_limit = 300        # seconds per case
/// shore = 4
/// k = 8                   # optional
/// max_topology = 32x32    # optional
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub models: Vec<GraphModel>,
    pub nodes: Vec<usize>,
    pub degrees: Vec<usize>,
    pub seeds: Vec<u64>,
    pub time_limit: Duration,
    pub shore: usize,
    pub k: Option<usize>,
    pub max_topology: Option<(usize, usize)>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self::desk()
    }
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("{s:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

/// Parses `RxC` (or a single `N` for `NxN`).
pub fn parse_grid(value: &str) -> Result<(usize, usize), String> {
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| format!("bad grid size {value:?}"))
    };
    match value.split_once(['x', 'X']) {
        Some((r, c)) => Ok((parse(r)?, parse(c)?)),
        None => parse(value).map(|n| (n, n)),
    }
}

impl SweepSpec {
    /// Default desk-scale sweep: 3 models x {100, 200, 400} nodes x
    /// {10, 20} degree x 3 seeds, 300 s per case.
    pub fn desk() -> Self {
        Self {
            models: GraphModel::ALL.to_vec(),
            nodes: vec![100, 200, 400],
            degrees: vec![10, 20],
            seeds: vec![1, 2, 3],
            time_limit: Duration::from_secs(300),
            shore: 4,
            k: None,
            max_topology: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut spec = Self::desk();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| BenchError::Spec {
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let value = value.trim();
            match key.trim() {
                "models" => spec.models = parse_list(value).map_err(err)?,
                "nodes" => spec.nodes = parse_list(value).map_err(err)?,
                "degrees" => spec.degrees = parse_list(value).map_err(err)?,
                "seeds" => spec.seeds = parse_list(value).map_err(err)?,
                "time_limit" => {
                    let secs: f64 = value.parse().map_err(|e| err(format!("time_limit: {e}")))?;
                    spec.time_limit =
                        Duration::try_from_secs_f64(secs).map_err(|e| err(format!("time_limit: {e}")))?;
                }
                "shore" => {
                    spec.shore = value
                        .parse()
                        .ok()
                        .filter(|&c| c > 0)
                        .ok_or_else(|| err(format!("bad shore {value:?}")))?;
                }
                "k" => {
                    spec.k = Some(
                        value
                            .parse()
                            .ok()
                            .filter(|&k| k > 0)
                            .ok_or_else(|| err(format!("bad k {value:?}")))?,
                    );
                }
                "max_topology" => spec.max_topology = Some(parse_grid(value).map_err(err)?),
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn cases(&self) -> Vec<BenchCase> {
        let config = EngineConfig {
            shore: self.shore,
            k: self.k,
            max_topology: self.max_topology,
            ..EngineConfig::default()
        };
        let mut out = Vec::new();
        for &model in &self.models {
            for &num_nodes in &self.nodes {
                for &degree in &self.degrees {
                    for &seed in &self.seeds {
                        out.push(BenchCase {
                            model,
                            num_nodes,
                            degree,
                            seed,
                            config: config.clone(),
                            time_limit: self.time_limit,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Verification result and metrics for an embedding produced elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportSummary {
    pub topology: ChimeraTopology,
    pub report: FeasibilityReport,
    pub qubits: usize,
    pub min_enclosing: Option<ChimeraTopology>,
}

/// Loads an embedding JSON file and checks it against `graph`. When
/// `expected` is given, the file must declare exactly that topology.
pub fn import_external_embedding(
    path: impl AsRef<Path>,
    graph: &LogicalGraph,
    expected: Option<ChimeraTopology>,
) -> Result<ImportSummary, EmbeddingError> {
    let doc = EmbeddingDoc::load(path)?;
    summarize_doc(&doc, graph, expected)
}

pub fn summarize_doc(
    doc: &EmbeddingDoc,
    graph: &LogicalGraph,
    expected: Option<ChimeraTopology>,
) -> Result<ImportSummary, EmbeddingError> {
    if let Some(expected) = expected.filter(|&t| t != doc.topology) {
        return Err(EmbeddingError::TopologyMismatch {
            expected,
            found: doc.topology,
        });
    }
    let chains = doc.chains_for(graph.num_nodes())?;
    let report = embedding::verify(graph, doc.topology, &chains)?;
    Ok(ImportSummary {
        topology: doc.topology,
        report,
        qubits: embedding::qubit_count(&chains),
        min_enclosing: embedding::min_enclosing_topology(doc.topology, &chains),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing() {
        let spec = SweepSpec::parse(
            "models = ba_star\nnodes = 50, 60 # sizes\n\ndegrees=4\nseeds=7\ntime_limit=2.5\nmax_topology=8x4\n",
        )
        .unwrap();
        assert_eq!(spec.models, vec![GraphModel::BaStar]);
        assert_eq!(spec.nodes, vec![50, 60]);
        assert_eq!(spec.seeds, vec![7]);
        assert_eq!(spec.time_limit, Duration::from_millis(2500));
        assert_eq!(spec.max_topology, Some((8, 4)));
        assert_eq!(spec.cases().len(), 2);
        assert_eq!(SweepSpec::desk().cases().len(), 54);
    }

    #[test]
    fn spec_errors() {
        for bad in ["models = star", "nodes", "nodes = ", "colour = red", "time_limit = -1", "shore = 0"] {
            assert!(
                matches!(SweepSpec::parse(bad), Err(BenchError::Spec { line: 1, .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(parse_grid("16x8"), Ok((16, 8)));
        assert_eq!(parse_grid("4"), Ok((4, 4)));
        assert!(parse_grid("0x2").is_err());
        assert!(parse_grid("ax2").is_err());
    }

    #[test]
    fn generator_errors_are_recorded() {
        let case = BenchCase {
            model: GraphModel::Regular,
            num_nodes: 5,
            degree: 3,
            seed: 1,
            config: EngineConfig::default(),
            time_limit: Duration::from_secs(5),
        };
        let rec = run_case(&case);
        assert_eq!(rec.status, CaseStatus::Error);
        assert!(!rec.feasible);
    }

    #[test]
    fn csv_needs_records() {
        assert!(matches!(write_csv(&[], Vec::new()), Err(BenchError::NoRecords)));
    }
}
