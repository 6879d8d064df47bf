//! Small-scale reference check by edge contraction.
//!
//! The hardware edge list is materialized from the cell and coupler rules,
//! every chain is contracted with a union-find, and the contracted graph must
//! contain `P` as a subgraph. This path shares no code with [`super::verify`].

use std::collections::HashSet;

use super::EmbeddingError;
use crate::chimera::ChimeraTopology;
use crate::graph::LogicalGraph;

pub const ORACLE_MAX_LOGICAL: usize = 12;
/// Largest topology `(rows, cols, shore)` the oracle accepts.
pub const ORACLE_MAX_TOPOLOGY: (usize, usize, usize) = (3, 3, 4);

/// Every hardware edge `(a, b)`, `a < b`, enumerated straight from the
/// unit-cell and coupler rules.
pub fn enumerate_hardware_edges(topology: ChimeraTopology) -> Vec<(usize, usize)> {
    let (n, m, c) = (topology.rows(), topology.cols(), topology.shore());
    let id = |x: usize, y: usize, z: usize| (x * m + y) * 2 * c + z;
    let mut edges = Vec::new();
    for x in 0..n {
        for y in 0..m {
            for left in 0..c {
                for right in c..2 * c {
                    edges.push((id(x, y, left), id(x, y, right)));
                }
            }
        }
    }
    for x in 0..n - 1 {
        for y in 0..m {
            for z in 0..c {
                edges.push((id(x, y, z), id(x + 1, y, z)));
            }
        }
    }
    for x in 0..n {
        for y in 0..m - 1 {
            for z in c..2 * c {
                edges.push((id(x, y, z), id(x, y + 1, z)));
            }
        }
    }
    edges
}

fn find(parent: &mut [usize], mut a: usize) -> usize {
    while parent[a] != a {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    a
}

/// True iff contracting every chain of `chains` yields a graph containing `P`.
pub fn minor_check_oracle(
    graph: &LogicalGraph,
    topology: ChimeraTopology,
    chains: &[Vec<usize>],
) -> Result<bool, EmbeddingError> {
    let (max_n, max_m, max_c) = ORACLE_MAX_TOPOLOGY;
    if graph.num_nodes() > ORACLE_MAX_LOGICAL {
        return Err(EmbeddingError::OracleScale(format!(
            "{} logical nodes (limit {ORACLE_MAX_LOGICAL})",
            graph.num_nodes()
        )));
    }
    if topology.rows() > max_n || topology.cols() > max_m || topology.shore() > max_c {
        return Err(EmbeddingError::OracleScale(format!(
            "topology {topology} exceeds T({max_n},{max_m},{max_c})"
        )));
    }
    if chains.len() != graph.num_nodes() {
        return Err(EmbeddingError::ChainCount {
            expected: graph.num_nodes(),
            found: chains.len(),
        });
    }
    let num_hw = topology.num_nodes();
    let mut label: Vec<Option<usize>> = vec![None; num_hw];
    for (v, chain) in chains.iter().enumerate() {
        if chain.is_empty() {
            return Ok(false);
        }
        for &u in chain {
            if u >= num_hw {
                return Err(EmbeddingError::HardwareIndex {
                    index: u,
                    num_nodes: num_hw,
                });
            }
            match label[u] {
                None => label[u] = Some(v),
                Some(w) if w == v => {}
                // a hardware node cannot be contracted into two vertices
                Some(_) => return Ok(false),
            }
        }
    }

    let edges = enumerate_hardware_edges(topology);
    let mut parent: Vec<usize> = (0..num_hw).collect();
    for &(a, b) in &edges {
        if let (Some(la), Some(lb)) = (label[a], label[b]) {
            if la == lb {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    for chain in chains {
        let root = find(&mut parent, chain[0]);
        if chain.iter().any(|&u| find(&mut parent, u) != root) {
            return Ok(false);
        }
    }

    let contracted: HashSet<(usize, usize)> = edges
        .iter()
        .filter_map(|&(a, b)| match (label[a], label[b]) {
            (Some(la), Some(lb)) if la != lb => Some((la.min(lb), la.max(lb))),
            _ => None,
        })
        .collect();
    Ok(graph.edges().all(|e| contracted.contains(&e)))
}
