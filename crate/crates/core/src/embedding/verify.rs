//! Feasibility check for a minor embedding.
//!
//! A feasible embedding of `P` satisfies:
//! 1. every logical node has a nonempty chain, and chains are pairwise disjoint;
//! 2. every chain induces a connected hardware subgraph;
//! 3. every logical edge `(p, q)` is realized by at least one hardware edge
//!    between `chain(p)` and `chain(q)`.
//!
//! The check reads chains only. It never consults the reverse map kept by
//! [`super::Embedding`], so it can also judge externally produced documents.

use std::collections::HashMap;

use serde::Serialize;

use super::{EmbeddingError, FREE};
use crate::chimera::ChimeraTopology;
use crate::graph::LogicalGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Nonempty,
    Disjointness,
    ChainConnectivity,
    GlobalConnection,
}

impl std::fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Nonempty => "nonempty",
            Self::Disjointness => "disjointness",
            Self::ChainConnectivity => "chain-connectivity",
            Self::GlobalConnection => "global-connection",
        })
    }
}

/// One broken condition, with a witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// Logical node with no hardware nodes.
    Nonempty { node: usize },
    /// Hardware node claimed by two chains.
    Disjointness { hardware: usize, nodes: [usize; 2] },
    /// Chain split into `pieces` connected pieces; `stranded` is a node not
    /// reachable from the chain's first node.
    ChainConnectivity {
        node: usize,
        pieces: usize,
        stranded: usize,
    },
    /// Logical edge with no coupler between its two chains.
    GlobalConnection { edge: [usize; 2] },
}

impl Violation {
    pub fn kind(&self) -> ViolationKind {
        match self {
            Self::Nonempty { .. } => ViolationKind::Nonempty,
            Self::Disjointness { .. } => ViolationKind::Disjointness,
            Self::ChainConnectivity { .. } => ViolationKind::ChainConnectivity,
            Self::GlobalConnection { .. } => ViolationKind::GlobalConnection,
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Nonempty { node } => write!(f, "nonempty: logical node {node} has an empty chain"),
            Self::Disjointness { hardware, nodes } => write!(
                f,
                "disjointness: hardware node {hardware} is in the chains of {} and {}",
                nodes[0], nodes[1]
            ),
            Self::ChainConnectivity {
                node,
                pieces,
                stranded,
            } => write!(
                f,
                "chain-connectivity: chain of {node} has {pieces} pieces (hardware node {stranded} is cut off)"
            ),
            Self::GlobalConnection { edge } => write!(
                f,
                "global-connection: no coupler between the chains of {} and {}",
                edge[0], edge[1]
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            feasible: violations.is_empty(),
            violations,
        }
    }
}

/// Checks all three conditions for the whole graph.
pub fn verify(
    graph: &LogicalGraph,
    topology: ChimeraTopology,
    chains: &[Vec<usize>],
) -> Result<FeasibilityReport, EmbeddingError> {
    let all: Vec<usize> = (0..graph.num_nodes()).collect();
    verify_subset(graph, topology, chains, &all)
}

/// Checks the conditions for the induced subgraph `P[subset]`. Disjointness
/// is still checked across every chain.
pub fn verify_subset(
    graph: &LogicalGraph,
    topology: ChimeraTopology,
    chains: &[Vec<usize>],
    subset: &[usize],
) -> Result<FeasibilityReport, EmbeddingError> {
    if chains.len() != graph.num_nodes() {
        return Err(EmbeddingError::ChainCount {
            expected: graph.num_nodes(),
            found: chains.len(),
        });
    }
    let num_hw = topology.num_nodes();
    let mut in_scope = vec![false; graph.num_nodes()];
    for &v in subset {
        if v >= graph.num_nodes() {
            return Err(EmbeddingError::UnknownLogicalNode {
                node: v,
                num_nodes: graph.num_nodes(),
            });
        }
        in_scope[v] = true;
    }

    let mut violations = Vec::new();

    for v in (0..graph.num_nodes()).filter(|&v| in_scope[v]) {
        if chains[v].is_empty() {
            violations.push(Violation::Nonempty { node: v });
        }
    }

    // owner of each hardware node; extra owners of shared nodes kept aside
    let mut owner = vec![FREE; num_hw];
    let mut shared: HashMap<usize, Vec<usize>> = HashMap::new();
    for (v, chain) in chains.iter().enumerate() {
        for &u in chain {
            if u >= num_hw {
                return Err(EmbeddingError::HardwareIndex {
                    index: u,
                    num_nodes: num_hw,
                });
            }
            match owner[u] {
                FREE => owner[u] = v,
                w if w == v => {}
                w => {
                    let extra = shared.entry(u).or_default();
                    if !extra.contains(&v) {
                        extra.push(v);
                        violations.push(Violation::Disjointness {
                            hardware: u,
                            nodes: [w, v],
                        });
                    }
                }
            }
        }
    }
    let belongs = |u: usize, v: usize| owner[u] == v || shared.get(&u).is_some_and(|s| s.contains(&v));

    // chain connectivity: flood each chain from its first node
    let mut stamp = vec![usize::MAX; num_hw];
    let mut stack = Vec::new();
    for v in (0..graph.num_nodes()).filter(|&v| in_scope[v]) {
        let chain = &chains[v];
        let Some(&start) = chain.first() else {
            continue;
        };
        let mut pieces = 0;
        let mut stranded = None;
        for &seed in chain {
            if stamp[seed] == v {
                continue;
            }
            pieces += 1;
            if seed != start && stranded.is_none() {
                stranded = Some(seed);
            }
            stamp[seed] = v;
            stack.push(seed);
            while let Some(u) = stack.pop() {
                topology.for_each_neighbor(u, |w| {
                    if stamp[w] != v && belongs(w, v) {
                        stamp[w] = v;
                        stack.push(w);
                    }
                });
            }
        }
        if pieces > 1 {
            violations.push(Violation::ChainConnectivity {
                node: v,
                pieces,
                stranded: stranded.expect("a second piece has a seed"),
            });
        }
    }

    // global connections
    for (p, q) in graph.edges().filter(|&(p, q)| in_scope[p] && in_scope[q]) {
        let (small, other) = if chains[p].len() <= chains[q].len() {
            (p, q)
        } else {
            (q, p)
        };
        let mut joined = false;
        for &u in &chains[small] {
            topology.for_each_neighbor(u, |w| joined |= belongs(w, other));
            if joined {
                break;
            }
        }
        if !joined {
            violations.push(Violation::GlobalConnection { edge: [p, q] });
        }
    }

    Ok(FeasibilityReport::from_violations(violations))
}
