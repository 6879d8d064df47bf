//! Logical problem graphs: the simple undirected graph `P` to be embedded,
//! random instance generators, densest-k-subgraph selection, and the
//! whitespace-separated edge-list format.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("self-loop on node {node}")]
    SelfLoop { node: usize },
    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: usize, v: usize },
    #[error("edge ({u}, {v}) references a node outside 0..{num_nodes}")]
    NodeOutOfRange { u: usize, v: usize, num_nodes: usize },
    #[error("graph has no nodes")]
    Empty,
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error("k = {k} is outside 1..={num_nodes}")]
    SubgraphSize { k: usize, num_nodes: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalGraph {
    adjacency: Vec<Vec<usize>>,
    num_edges: usize,
}

impl LogicalGraph {
    /// Builds a graph on nodes `0..num_nodes`. Rejects self-loops, parallel
    /// edges and out-of-range ids. Connectivity is not required here; see
    /// [`LogicalGraph::ensure_connected`].
    pub fn from_edges(
        num_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        if num_nodes == 0 {
            return Err(GraphError::Empty);
        }
        let mut adjacency = vec![Vec::new(); num_nodes];
        let mut num_edges = 0;
        for (u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(GraphError::NodeOutOfRange { u, v, num_nodes });
            }
            if u == v {
                return Err(GraphError::SelfLoop { node: u });
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
            num_edges += 1;
        }
        for (u, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if let Some(w) = nbrs.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = (u.min(w[0]), u.max(w[0]));
                return Err(GraphError::DuplicateEdge { u: a, v: b });
            }
        }
        Ok(Self {
            adjacency,
            num_edges,
        })
    }

    pub fn complete(num_nodes: usize) -> Self {
        let edges = (0..num_nodes).flat_map(|u| (u + 1..num_nodes).map(move |v| (u, v)));
        Self::from_edges(num_nodes.max(1), edges).expect("complete graph is simple")
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_nodes() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn component_count(&self) -> usize {
        let n = self.num_nodes();
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    pub fn ensure_connected(&self) -> Result<(), GraphError> {
        match self.component_count() {
            1 => Ok(()),
            components => Err(GraphError::Disconnected { components }),
        }
    }

    /// Number of edges with both endpoints in `nodes` (which must be duplicate-free).
    pub fn induced_edge_count(&self, nodes: &[usize]) -> usize {
        let mut inside = vec![false; self.num_nodes()];
        for &v in nodes {
            inside[v] = true;
        }
        nodes
            .iter()
            .map(|&u| self.adjacency[u].iter().filter(|&&v| v > u && inside[v]).count())
            .sum()
    }

    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::with_capacity(self.num_edges * 8);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Parses `u v` pairs, one per line, 0-based. Blank lines and lines
    /// starting with `#` are skipped. The node count is the largest id plus one.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        let mut max_id = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| GraphError::Parse {
                line: i + 1,
                message,
            };
            let mut fields = line.split_whitespace();
            let mut next_id = || -> Result<usize, GraphError> {
                let tok = fields
                    .next()
                    .ok_or_else(|| parse_err("expected two node ids".into()))?;
                tok.parse::<usize>()
                    .map_err(|e| parse_err(format!("bad node id {tok:?}: {e}")))
            };
            let u = next_id()?;
            let v = next_id()?;
            if fields.next().is_some() {
                return Err(parse_err("trailing tokens after edge".into()));
            }
            max_id = Some(max_id.unwrap_or(0).max(u).max(v));
            edges.push((u, v));
        }
        let num_nodes = max_id.map_or(0, |m| m + 1);
        let graph = Self::from_edges(num_nodes, edges)?;
        graph.ensure_connected()?;
        Ok(graph)
    }

    pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        Self::parse_edge_list(&std::fs::read_to_string(path)?)
    }

    pub fn save_edge_list(&self, path: impl AsRef<Path>) -> Result<(), GraphError> {
        std::fs::write(path, self.to_edge_list_string())?;
        Ok(())
    }
}

/// Seed graph for the preferential-attachment generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BaSeed {
    Star,
    Complete,
}

/// Barabási-Albert graph grown from a `(d+1)`-node star.
pub fn gen_ba_star(num_nodes: usize, d: usize, seed: u64) -> Result<LogicalGraph, GraphError> {
    gen_ba(num_nodes, d, seed, BaSeed::Star)
}

/// Barabási-Albert graph grown from the complete graph `K_{d+1}`.
pub fn gen_ba_complete(num_nodes: usize, d: usize, seed: u64) -> Result<LogicalGraph, GraphError> {
    gen_ba(num_nodes, d, seed, BaSeed::Complete)
}

fn gen_ba(num_nodes: usize, d: usize, seed: u64, init: BaSeed) -> Result<LogicalGraph, GraphError> {
    if d == 0 || num_nodes <= d {
        return Err(GraphError::InvalidParameters(format!(
            "Barabási-Albert needs num_nodes > d >= 1, got num_nodes = {num_nodes}, d = {d}"
        )));
    }
    // each new node brings ceil(d/2) edges, so the mean degree tends to d
    let per_node = d.div_ceil(2);
    let mut edges: Vec<(usize, usize)> = match init {
        BaSeed::Star => (1..=d).map(|v| (0, v)).collect(),
        BaSeed::Complete => (0..=d)
            .flat_map(|u| (u + 1..=d).map(move |v| (u, v)))
            .collect(),
    };
    // one entry per edge endpoint: sampling from it is degree-proportional
    let mut endpoints: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets = BTreeSet::new();
    for new in d + 1..num_nodes {
        targets.clear();
        while targets.len() < per_node {
            targets.insert(endpoints[rng.gen_range(0..endpoints.len())]);
        }
        for &t in &targets {
            edges.push((t, new));
            endpoints.push(t);
            endpoints.push(new);
        }
    }
    LogicalGraph::from_edges(num_nodes, edges)
}

const REGULAR_ATTEMPTS: usize = 10_000;

/// Random connected `d`-regular graph. Stubs are paired at random; pairs that
/// would form a loop or a parallel edge are returned to the pool and
/// re-paired, and the attempt restarts if no valid pair remains. Attempts
/// that produce a disconnected graph are discarded.
pub fn gen_regular(num_nodes: usize, d: usize, seed: u64) -> Result<LogicalGraph, GraphError> {
    if d == 0 || d >= num_nodes || (d * num_nodes) % 2 != 0 {
        return Err(GraphError::InvalidParameters(format!(
            "d-regular graph needs 1 <= d < num_nodes and d * num_nodes even, \
             got num_nodes = {num_nodes}, d = {d}"
        )));
    }
    if d == 1 && num_nodes > 2 {
        return Err(GraphError::InvalidParameters(
            "a 1-regular graph on more than two nodes is never connected".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..REGULAR_ATTEMPTS {
        let Some(edges) = try_pairing(num_nodes, d, &mut rng) else {
            continue;
        };
        let graph = LogicalGraph::from_edges(num_nodes, edges)?;
        if graph.is_connected() {
            return Ok(graph);
        }
    }
    Err(GraphError::InvalidParameters(format!(
        "no connected {d}-regular graph on {num_nodes} nodes after {REGULAR_ATTEMPTS} attempts"
    )))
}

fn try_pairing(num_nodes: usize, d: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(usize, usize)>> {
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(num_nodes * d / 2);
    let mut present: HashSet<(usize, usize)> = HashSet::with_capacity(num_nodes * d / 2);
    let mut stubs: Vec<usize> = (0..num_nodes).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    while !stubs.is_empty() {
        let mut leftover: BTreeMap<usize, usize> = BTreeMap::new();
        stubs.shuffle(rng);
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && present.insert((a, b)) {
                edges.push((a, b));
            } else {
                *leftover.entry(a).or_default() += 1;
                *leftover.entry(b).or_default() += 1;
            }
        }
        if !leftover.is_empty() && !has_valid_pair(&leftover, &present) {
            return None;
        }
        stubs = leftover
            .into_iter()
            .flat_map(|(v, count)| std::iter::repeat(v).take(count))
            .collect();
    }
    Some(edges)
}

fn has_valid_pair(leftover: &BTreeMap<usize, usize>, present: &HashSet<(usize, usize)>) -> bool {
    let nodes: Vec<usize> = leftover.keys().copied().collect();
    nodes
        .iter()
        .enumerate()
        .any(|(i, &a)| nodes[i + 1..].iter().any(|&b| !present.contains(&(a, b))))
}

/// Graphs up to this many nodes get an exact densest-k-subgraph by enumeration.
pub const EXACT_DENSEST_LIMIT: usize = 20;

/// Picks `k` nodes with (heuristically) the most induced edges. Exact for
/// graphs with at most [`EXACT_DENSEST_LIMIT`] nodes, greedy peeling above.
/// The result is sorted ascending.
pub fn densest_k_subgraph(graph: &LogicalGraph, k: usize) -> Result<Vec<usize>, GraphError> {
    let n = graph.num_nodes();
    if k == 0 || k > n {
        return Err(GraphError::SubgraphSize { k, num_nodes: n });
    }
    if n <= EXACT_DENSEST_LIMIT {
        Ok(densest_exact(graph, k))
    } else {
        greedy_peel(graph, k)
    }
}

/// Repeatedly deletes a minimum-degree node (lowest id on ties) until `k` remain.
pub fn greedy_peel(graph: &LogicalGraph, k: usize) -> Result<Vec<usize>, GraphError> {
    let n = graph.num_nodes();
    if k == 0 || k > n {
        return Err(GraphError::SubgraphSize { k, num_nodes: n });
    }
    let mut degree: Vec<usize> = (0..n).map(|v| graph.degree(v)).collect();
    let mut alive = vec![true; n];
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (degree[v], v)).collect();
    for _ in k..n {
        let (_, v) = queue.pop_first().expect("more than k nodes remain");
        alive[v] = false;
        for &u in graph.neighbors(v) {
            if alive[u] {
                queue.remove(&(degree[u], u));
                degree[u] -= 1;
                queue.insert((degree[u], u));
            }
        }
    }
    Ok((0..n).filter(|&v| alive[v]).collect())
}

fn densest_exact(graph: &LogicalGraph, k: usize) -> Vec<usize> {
    let n = graph.num_nodes();
    debug_assert!(n <= 32);
    let masks: Vec<u32> = (0..n)
        .map(|u| graph.neighbors(u).iter().fold(0u32, |m, &v| m | (1 << v)))
        .collect();
    let count = |set: u32| -> u32 {
        let mut total = 0;
        let mut rest = set;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            total += (masks[u] & set).count_ones();
        }
        total / 2
    };
    let limit: u64 = 1 << n;
    let mut set: u64 = (1 << k) - 1;
    let (mut best, mut best_count) = (set, count(set as u32));
    // Gosper's hack: next integer with the same popcount
    loop {
        let low = set & set.wrapping_neg();
        let ripple = set + low;
        set = (((ripple ^ set) >> 2) / low) | ripple;
        if set >= limit {
            break;
        }
        let c = count(set as u32);
        if c > best_count {
            best = set;
            best_count = c;
        }
    }
    (0..n).filter(|&v| best & (1 << v) != 0).collect()
}
