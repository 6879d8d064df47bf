//! The adaptive-topology embedding loop.
//!
//! A dense `k`-node subgraph of `P` is seeded with a clique embedding on a
//! small square topology. The remaining nodes are added one per turn: the
//! next node is the unembedded neighbor of `S` whose embedded neighbors have
//! the smallest summed turn weight, and [`node_embedding`] grows chains
//! towards it. When no free node can reach all required chains, the
//! topology is doubled with [`topology_adapting`] and the same node is
//! retried.

mod adapt;
mod init;
mod node_embedding;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chimera::ChimeraTopology;
use crate::embedding::{Embedding, EmbeddingError};
use crate::graph::{densest_k_subgraph, GraphError, LogicalGraph};

pub use adapt::topology_adapting;
pub use init::{clique_chains, seed_topology};
pub use node_embedding::{find_center, find_center_with, node_embedding, node_embedding_with, Additional, CleanPathField, Workspace};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("time limit of {limit:?} exceeded")]
    Timeout { limit: Duration },
    #[error("no feasible embedding within the topology cap {cap_rows}x{cap_cols} (needed {needed})")]
    TopologyCap {
        needed: ChimeraTopology,
        cap_rows: usize,
        cap_cols: usize,
    },
    #[error("internal invariant broken: {0}")]
    Internal(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Shore size `c` of the Chimera cells.
    pub shore: usize,
    /// Size of the seed subgraph; `min(2c, |V_P|)` when unset.
    pub k: Option<usize>,
    /// Starting `(rows, cols)`; enlarged to fit the seed clique if smaller.
    pub initial_topology: Option<(usize, usize)>,
    /// Largest `(rows, cols)` the topology may reach.
    pub max_topology: Option<(usize, usize)>,
    pub time_limit: Option<Duration>,
    /// Re-verify `P[S]` after every turn and expansion.
    pub audit: bool,
    /// Record a [`TraceEvent`] per step.
    pub trace: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            shore: 4,
            k: None,
            initial_topology: None,
            max_topology: None,
            time_limit: None,
            audit: false,
            trace: false,
        }
    }
}

impl EngineConfig {
    pub fn with_shore(shore: usize) -> Self {
        Self {
            shore,
            ..Self::default()
        }
    }

    pub fn seed_size(&self, num_nodes: usize) -> usize {
        self.k.unwrap_or(2 * self.shore).min(num_nodes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Embedded { node: usize, turn: usize, added: usize },
    EmptyEmbedding { node: usize },
    Expanded { topology: ChimeraTopology },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbedReport {
    pub num_nodes: usize,
    pub num_edges: usize,
    pub k: usize,
    /// Final adaptive topology.
    pub topology: ChimeraTopology,
    /// Bounding box of the cells actually used.
    pub min_enclosing: Option<ChimeraTopology>,
    pub qubits_used: usize,
    pub iterations: usize,
    pub turns: usize,
    pub expansions: usize,
    pub wall_time: f64,
    pub max_chain_length: usize,
    pub chain_lengths: Vec<usize>,
}

impl EmbedReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct EmbedOutcome {
    pub embedding: Embedding,
    pub report: EmbedReport,
    pub trace: Vec<TraceEvent>,
}

/// Unembedded node adjacent to `S` minimizing the summed weight of its
/// embedded neighbors; lowest id on ties. `None` when no node qualifies.
pub fn select_next_node(graph: &LogicalGraph, embedded: &[bool], weight: &[usize]) -> Option<usize> {
    (0..graph.num_nodes())
        .filter(|&v| !embedded[v])
        .filter_map(|v| {
            let mut touches = false;
            let mut score = 0usize;
            for &u in graph.neighbors(v) {
                if embedded[u] {
                    touches = true;
                    score += weight[u];
                }
            }
            touches.then_some((score, v))
        })
        .min()
        .map(|(_, v)| v)
}

/// Run state between turns.
#[derive(Debug, Clone)]
pub struct EngineState<'g> {
    graph: &'g LogicalGraph,
    embedding: Embedding,
    embedded: Vec<bool>,
    weight: Vec<usize>,
    num_embedded: usize,
    turn: usize,
    iterations: usize,
    expansions: usize,
    /// Node carried over from an isolated attempt.
    pending: Option<usize>,
    workspace: Workspace,
}

impl<'g> EngineState<'g> {
    /// Seeds the state with a clique embedding of the densest `k`-subgraph on
    /// `topology`, which must be at least as large as [`seed_topology`].
    pub fn initialize(
        graph: &'g LogicalGraph,
        k: usize,
        topology: ChimeraTopology,
    ) -> Result<Self, EngineError> {
        let n = graph.num_nodes();
        if k == 0 || k > n {
            return Err(EngineError::InvalidConfig(format!("k = {k} must be in 1..={n}")));
        }
        let (side, chains) = clique_chains(k, topology.shore());
        if topology.rows() < side || topology.cols() < side {
            return Err(EngineError::InvalidConfig(format!(
                "{topology} cannot host the K_{k} seed embedding (needs {side}x{side} cells)"
            )));
        }
        let seed_nodes = densest_k_subgraph(graph, k)?;
        let mut embedding = Embedding::empty(topology, n);
        let mut embedded = vec![false; n];
        for (&v, chain) in seed_nodes.iter().zip(&chains) {
            for &u in chain {
                embedding.assign(v, topology.index_unchecked(u))?;
            }
            embedded[v] = true;
        }
        Ok(Self {
            graph,
            embedding,
            embedded,
            weight: vec![0; n],
            num_embedded: k,
            turn: 1,
            iterations: 0,
            expansions: 0,
            pending: None,
            workspace: Workspace::default(),
        })
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn embedded(&self) -> &[bool] {
        &self.embedded
    }

    pub fn embedded_nodes(&self) -> Vec<usize> {
        (0..self.embedded.len()).filter(|&v| self.embedded[v]).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.num_embedded == self.graph.num_nodes()
    }

    pub fn is_isolated(&self) -> bool {
        self.pending.is_some()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn expansions(&self) -> usize {
        self.expansions
    }

    /// Successful turns so far.
    pub fn turns(&self) -> usize {
        self.turn - 1
    }

    /// The node to embed next: the carried-over node after an isolated
    /// attempt, otherwise the weight argmin.
    pub fn next_node(&self) -> Option<usize> {
        self.pending
            .or_else(|| select_next_node(self.graph, &self.embedded, &self.weight))
    }

    /// One iteration: a node-embedding attempt for `node`. Returns the event
    /// describing the outcome; on an empty embedding the state is flagged
    /// isolated and nothing else changes.
    pub fn try_embed(&mut self, node: usize) -> Result<TraceEvent, EngineError> {
        self.iterations += 1;
        let additional = node_embedding_with(&mut self.workspace, self.graph, &self.embedding, &self.embedded, node);
        if additional.is_empty() {
            self.pending = Some(node);
            return Ok(TraceEvent::EmptyEmbedding { node });
        }
        let added = additional.node_count();
        for (&v, chain) in &additional.chains {
            for &u in chain {
                self.embedding.assign(v, u)?;
            }
        }
        debug_assert!(self.embedding.audit());
        self.embedded[node] = true;
        self.num_embedded += 1;
        self.weight[node] = self.turn;
        let event = TraceEvent::Embedded {
            node,
            turn: self.turn,
            added,
        };
        self.turn += 1;
        self.pending = None;
        Ok(event)
    }

    /// One iteration: doubles the topology and the embedding.
    pub fn expand(&mut self) -> TraceEvent {
        self.iterations += 1;
        self.expansions += 1;
        self.embedding = topology_adapting(&self.embedding);
        TraceEvent::Expanded {
            topology: self.embedding.topology(),
        }
    }

    /// Verifies the current embedding on `P[S]`.
    pub fn check_feasible(&self) -> Result<(), EngineError> {
        let report = self.embedding.verify_subset(self.graph, &self.embedded_nodes())?;
        if report.feasible {
            Ok(())
        } else {
            Err(EngineError::Internal(format!(
                "embedding infeasible for P[S] after turn {}: {}",
                self.turns(),
                report.violations[0]
            )))
        }
    }

    fn into_embedding(self) -> Embedding {
        self.embedding
    }
}

/// Embeds the whole of `graph`.
pub fn embed(graph: &LogicalGraph, config: &EngineConfig) -> Result<EmbedOutcome, EngineError> {
    let start = Instant::now();
    let timed_out = || config.time_limit.is_some_and(|limit| start.elapsed() >= limit);
    let timeout_err = || EngineError::Timeout {
        limit: config.time_limit.unwrap_or_default(),
    };

    if config.shore == 0 {
        return Err(EngineError::InvalidConfig("shore size must be positive".into()));
    }
    graph.ensure_connected()?;
    let n = graph.num_nodes();
    let k = config.seed_size(n);
    if config.k.is_some_and(|k| k == 0 || k > n) {
        return Err(EngineError::InvalidConfig(format!(
            "k = {} must be in 1..={n}",
            config.k.unwrap_or_default()
        )));
    }

    let seed = seed_topology(k, config.shore);
    let (rows, cols) = config
        .initial_topology
        .map_or((seed.rows(), seed.cols()), |(r, c)| (r.max(seed.rows()), c.max(seed.cols())));
    let initial = ChimeraTopology::new(rows, cols, config.shore)
        .map_err(|e| EngineError::InvalidConfig(e.to_string()))?;
    let over_cap = |t: ChimeraTopology| {
        config
            .max_topology
            .is_some_and(|(r, c)| t.rows() > r || t.cols() > c)
    };
    let cap_err = |needed: ChimeraTopology| {
        let (cap_rows, cap_cols) = config.max_topology.unwrap_or_default();
        EngineError::TopologyCap {
            needed,
            cap_rows,
            cap_cols,
        }
    };
    if over_cap(initial) {
        return Err(cap_err(initial));
    }

    let mut state = EngineState::initialize(graph, k, initial)?;
    let mut trace = Vec::new();
    if config.audit {
        state.check_feasible()?;
    }
    if timed_out() {
        return Err(timeout_err());
    }

    let bound = 3 * n;
    while !state.is_complete() {
        if timed_out() {
            return Err(timeout_err());
        }
        let node = state
            .next_node()
            .ok_or_else(|| EngineError::Internal("no unembedded node touches S".into()))?;
        let event = state.try_embed(node)?;
        if config.trace {
            trace.push(event);
        }
        if state.is_isolated() {
            let doubled = state.embedding().topology().doubled();
            if over_cap(doubled) {
                return Err(cap_err(doubled));
            }
            let event = state.expand();
            if config.trace {
                trace.push(event);
            }
        }
        if config.audit {
            state.check_feasible()?;
        }
        if state.iterations() > bound {
            return Err(EngineError::Internal(format!(
                "{} iterations exceed the bound 3|V_P| = {bound}",
                state.iterations()
            )));
        }
    }

    let (iterations, turns, expansions) = (state.iterations(), state.turns(), state.expansions());
    let embedding = state.into_embedding();
    let chain_lengths = embedding.chain_lengths();
    let report = EmbedReport {
        num_nodes: n,
        num_edges: graph.num_edges(),
        k,
        topology: embedding.topology(),
        min_enclosing: embedding.min_enclosing_topology(),
        qubits_used: embedding.qubit_count(),
        iterations,
        turns,
        expansions,
        wall_time: start.elapsed().as_secs_f64(),
        max_chain_length: chain_lengths.iter().copied().max().unwrap_or(0),
        chain_lengths,
    };
    Ok(EmbedOutcome {
        embedding,
        report,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_ba_complete, gen_ba_star, gen_regular};

    fn audited() -> EngineConfig {
        EngineConfig {
            audit: true,
            trace: true,
            ..EngineConfig::default()
        }
    }

    #[test]
    fn select_prefers_low_weight_neighbors() {
        // a=0, b=1 embedded; c=2 touches a, e=3 touches b
        let g = LogicalGraph::from_edges(4, [(0, 1), (0, 2), (1, 3)]).unwrap();
        assert_eq!(select_next_node(&g, &[true, true, false, false], &[0, 1, 0, 0]), Some(2));
    }

    #[test]
    fn select_breaks_ties_by_id() {
        // node 2 touches a and b (0 + 1), node 3 touches b only (1)
        let g = LogicalGraph::from_edges(4, [(0, 1), (0, 2), (1, 2), (1, 3)]).unwrap();
        assert_eq!(select_next_node(&g, &[true, true, false, false], &[0, 1, 0, 0]), Some(2));
        let g = LogicalGraph::from_edges(4, [(0, 1), (1, 2), (0, 3), (1, 3)]).unwrap();
        assert_eq!(select_next_node(&g, &[true, true, false, false], &[0, 1, 0, 0]), Some(2));
    }

    #[test]
    fn select_last_node_and_none() {
        let g = LogicalGraph::complete(3);
        assert_eq!(select_next_node(&g, &[true, false, true], &[0, 0, 1]), Some(1));
        assert_eq!(select_next_node(&g, &[true, true, true], &[0, 0, 1]), None);
        assert_eq!(select_next_node(&g, &[false, false, false], &[0, 0, 0]), None);
    }

    #[test]
    fn initialize_k5() {
        let g = LogicalGraph::complete(5);
        let state = EngineState::initialize(&g, 5, seed_topology(5, 4)).unwrap();
        assert!(state.is_complete());
        state.check_feasible().unwrap();
        assert!(state.embedding().verify(&g).unwrap().feasible);
    }

    #[test]
    fn initialize_k1_and_errors() {
        let g = LogicalGraph::complete(4);
        let state = EngineState::initialize(&g, 1, seed_topology(1, 4)).unwrap();
        assert_eq!(state.embedded_nodes().len(), 1);
        assert_eq!(state.embedding().qubit_count(), 1);
        assert!(EngineState::initialize(&g, 5, seed_topology(4, 4)).is_err());
        let small = ChimeraTopology::new(1, 1, 2).unwrap();
        assert!(matches!(
            EngineState::initialize(&g, 4, small),
            Err(EngineError::InvalidConfig(_))
        ));
    }

    #[test]
    fn initialize_on_ba_complete() {
        let g = gen_ba_complete(100, 10, 3).unwrap();
        let state = EngineState::initialize(&g, 11, seed_topology(11, 4)).unwrap();
        assert_eq!(state.embedded_nodes().len(), 11);
        state.check_feasible().unwrap();
    }

    #[test]
    fn single_edge() {
        let g = LogicalGraph::from_edges(2, [(0, 1)]).unwrap();
        for k in [1, 2] {
            let cfg = EngineConfig {
                k: Some(k),
                ..audited()
            };
            let out = embed(&g, &cfg).unwrap();
            assert_eq!(out.report.qubits_used, 2);
            assert_eq!(out.embedding.chain_lengths(), vec![1, 1]);
            assert_eq!(out.report.topology, ChimeraTopology::new(1, 1, 4).unwrap());
            assert!(out.embedding.verify(&g).unwrap().feasible);
        }
    }

    #[test]
    fn triangle() {
        let g = LogicalGraph::complete(3);
        for k in 1..=3 {
            let cfg = EngineConfig {
                k: Some(k),
                ..audited()
            };
            let out = embed(&g, &cfg).unwrap();
            assert!(out.report.qubits_used <= 4);
            assert_eq!(out.report.topology, ChimeraTopology::new(1, 1, 4).unwrap());
        }
    }

    #[test]
    fn single_node_graph() {
        let g = LogicalGraph::from_edges(1, []).unwrap();
        let out = embed(&g, &EngineConfig::default()).unwrap();
        assert_eq!(out.report.qubits_used, 1);
        assert_eq!(out.report.iterations, 0);
    }

    #[test]
    fn generated_graphs_with_audit() {
        for seed in 0..3 {
            for g in [
                gen_ba_star(60, 4, seed).unwrap(),
                gen_ba_complete(60, 6, seed).unwrap(),
                gen_regular(60, 5, seed).unwrap(),
            ] {
                let out = embed(&g, &audited()).unwrap();
                assert!(out.embedding.verify(&g).unwrap().feasible);
                assert!(out.report.iterations <= 3 * g.num_nodes());
                assert_eq!(out.report.turns, g.num_nodes() - out.report.k);
                assert_eq!(out.report.qubits_used, out.embedding.qubit_count());
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let g = LogicalGraph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            embed(&g, &EngineConfig::default()),
            Err(EngineError::Graph(GraphError::Disconnected { components: 2 }))
        ));
        let g = LogicalGraph::complete(3);
        let cfg = EngineConfig {
            k: Some(4),
            ..EngineConfig::default()
        };
        assert!(matches!(embed(&g, &cfg), Err(EngineError::InvalidConfig(_))));
        assert!(embed(&g, &EngineConfig::with_shore(0)).is_err());
    }

    #[test]
    fn cap_and_timeout() {
        let g = gen_ba_complete(80, 10, 1).unwrap();
        let cfg = EngineConfig {
            max_topology: Some((1, 1)),
            ..EngineConfig::default()
        };
        assert!(matches!(embed(&g, &cfg), Err(EngineError::TopologyCap { .. })));
        let cfg = EngineConfig {
            max_topology: Some((2, 2)),
            ..EngineConfig::default()
        };
        assert!(matches!(embed(&g, &cfg), Err(EngineError::TopologyCap { .. })));
        let cfg = EngineConfig {
            time_limit: Some(Duration::ZERO),
            ..EngineConfig::default()
        };
        assert!(matches!(embed(&g, &cfg), Err(EngineError::Timeout { .. })));
    }

    #[test]
    fn initial_topology_override() {
        let g = gen_ba_star(30, 4, 2).unwrap();
        let cfg = EngineConfig {
            initial_topology: Some((4, 4)),
            ..audited()
        };
        let out = embed(&g, &cfg).unwrap();
        assert!(out.report.topology.rows() >= 4);
        assert!(out.embedding.verify(&g).unwrap().feasible);
    }
}
