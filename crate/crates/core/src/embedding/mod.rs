//! Embedding data model: chains of hardware nodes per logical node, the
//! reverse map, the JSON interchange format, feasibility checking and
//! resource metrics.

mod oracle;
mod verify;

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chimera::ChimeraTopology;

pub use oracle::{enumerate_hardware_edges, minor_check_oracle, ORACLE_MAX_LOGICAL, ORACLE_MAX_TOPOLOGY};
pub use verify::{verify, verify_subset, FeasibilityReport, Violation, ViolationKind};

/// Reverse-map value of a hardware node that belongs to no chain.
pub const FREE: usize = usize::MAX;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding has {found} chains but the graph has {expected} nodes")]
    ChainCount { expected: usize, found: usize },
    #[error("embedding names logical node {node}, graph has {num_nodes} nodes")]
    UnknownLogicalNode { node: usize, num_nodes: usize },
    #[error("hardware index {index} is outside a topology with {num_nodes} nodes")]
    HardwareIndex { index: usize, num_nodes: usize },
    #[error("hardware node {hardware} already belongs to logical node {owner}")]
    AlreadyAssigned { hardware: usize, owner: usize },
    #[error("embedding is on {found}, expected {expected}")]
    TopologyMismatch {
        expected: ChimeraTopology,
        found: ChimeraTopology,
    },
    #[error("oracle scale exceeded: {0}")]
    OracleScale(String),
    #[error("malformed embedding JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A (possibly partial) embedding: one chain per logical node plus the
/// reverse map from hardware node to owner. Chains are kept disjoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    topology: ChimeraTopology,
    chains: Vec<Vec<usize>>,
    owner: Vec<usize>,
    /// `owner[u] != FREE` as a bitset, 64 nodes per word.
    occupied: Vec<u64>,
}

impl Embedding {
    /// All chains empty, every hardware node free.
    pub fn empty(topology: ChimeraTopology, num_logical: usize) -> Self {
        Self {
            topology,
            chains: vec![Vec::new(); num_logical],
            owner: vec![FREE; topology.num_nodes()],
            occupied: vec![0; topology.num_nodes().div_ceil(64)],
        }
    }

    /// Builds an embedding from explicit chains, rejecting overlaps.
    pub fn from_chains(
        topology: ChimeraTopology,
        chains: Vec<Vec<usize>>,
    ) -> Result<Self, EmbeddingError> {
        let mut emb = Self::empty(topology, chains.len());
        for (v, chain) in chains.into_iter().enumerate() {
            for u in chain {
                emb.assign(v, u)?;
            }
        }
        Ok(emb)
    }

    pub fn topology(&self) -> ChimeraTopology {
        self.topology
    }

    pub fn num_logical(&self) -> usize {
        self.chains.len()
    }

    pub fn chain(&self, v: usize) -> &[usize] {
        &self.chains[v]
    }

    pub fn chains(&self) -> &[Vec<usize>] {
        &self.chains
    }

    /// Owner of hardware node `u`, `None` when free.
    pub fn owner(&self, u: usize) -> Option<usize> {
        match self.owner[u] {
            FREE => None,
            v => Some(v),
        }
    }

    pub fn is_free(&self, u: usize) -> bool {
        self.owner[u] == FREE
    }

    pub(crate) fn owner_slice(&self) -> &[usize] {
        &self.owner
    }

    pub(crate) fn occupied_bits(&self) -> &[u64] {
        &self.occupied
    }

    /// True when every chain is empty.
    pub fn is_empty(&self) -> bool {
        self.chains.iter().all(Vec::is_empty)
    }

    /// Adds hardware node `u` to chain `v`. Re-adding a node already in `v`
    /// is a no-op.
    pub fn assign(&mut self, v: usize, u: usize) -> Result<(), EmbeddingError> {
        if v >= self.chains.len() {
            return Err(EmbeddingError::UnknownLogicalNode {
                node: v,
                num_nodes: self.chains.len(),
            });
        }
        if u >= self.owner.len() {
            return Err(EmbeddingError::HardwareIndex {
                index: u,
                num_nodes: self.owner.len(),
            });
        }
        match self.owner[u] {
            FREE => {
                self.owner[u] = v;
                self.occupied[u / 64] |= 1 << (u % 64);
                self.chains[v].push(u);
                Ok(())
            }
            w if w == v => Ok(()),
            w => Err(EmbeddingError::AlreadyAssigned {
                hardware: u,
                owner: w,
            }),
        }
    }

    /// Checks that the reverse map and the chains describe the same relation.
    pub fn audit(&self) -> bool {
        let mut seen = 0;
        for (v, chain) in self.chains.iter().enumerate() {
            for &u in chain {
                if self.owner.get(u) != Some(&v) {
                    return false;
                }
            }
            seen += chain.len();
        }
        let bits_agree = (0..self.owner.len())
            .all(|u| (self.occupied[u / 64] >> (u % 64) & 1 == 1) == (self.owner[u] != FREE));
        bits_agree && seen == self.owner.iter().filter(|&&o| o != FREE).count()
    }

    pub fn qubit_count(&self) -> usize {
        qubit_count(&self.chains)
    }

    pub fn chain_lengths(&self) -> Vec<usize> {
        self.chains.iter().map(Vec::len).collect()
    }

    pub fn min_enclosing_topology(&self) -> Option<ChimeraTopology> {
        min_enclosing_topology(self.topology, &self.chains)
    }

    pub fn verify(&self, graph: &crate::graph::LogicalGraph) -> Result<FeasibilityReport, EmbeddingError> {
        verify(graph, self.topology, &self.chains)
    }

    pub fn verify_subset(
        &self,
        graph: &crate::graph::LogicalGraph,
        subset: &[usize],
    ) -> Result<FeasibilityReport, EmbeddingError> {
        verify_subset(graph, self.topology, &self.chains, subset)
    }

    /// The interchange form, with every chain sorted ascending.
    pub fn to_doc(&self) -> EmbeddingDoc {
        let chains = self
            .chains
            .iter()
            .enumerate()
            .map(|(v, chain)| {
                let mut sorted = chain.clone();
                sorted.sort_unstable();
                (v, sorted)
            })
            .collect();
        EmbeddingDoc {
            topology: self.topology,
            chains,
        }
    }

    pub fn to_json(&self) -> String {
        self.to_doc().to_json()
    }
}

/// Total hardware nodes used over all chains.
pub fn qubit_count(chains: &[Vec<usize>]) -> usize {
    chains.iter().map(Vec::len).sum()
}

/// Bounding box, in unit cells, of every cell that hosts a chain node.
/// `None` for an empty embedding.
pub fn min_enclosing_topology(
    topology: ChimeraTopology,
    chains: &[Vec<usize>],
) -> Option<ChimeraTopology> {
    let mut bounds: Option<(usize, usize, usize, usize)> = None;
    for &u in chains.iter().flatten() {
        let c = topology.coord_of(u).ok()?;
        bounds = Some(match bounds {
            None => (c.x, c.x, c.y, c.y),
            Some((x0, x1, y0, y1)) => (x0.min(c.x), x1.max(c.x), y0.min(c.y), y1.max(c.y)),
        });
    }
    let (x0, x1, y0, y1) = bounds?;
    ChimeraTopology::new(x1 - x0 + 1, y1 - y0 + 1, topology.shore()).ok()
}

/// JSON interchange format:
/// `{"topology":[n,m,c],"chains":{"<logical id>":[flat hardware indices...]}}`.
///
/// The same format is accepted for embeddings produced by other tools. It
/// may describe overlapping chains; [`verify`] reports those.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingDoc {
    pub topology: ChimeraTopology,
    pub chains: BTreeMap<usize, Vec<usize>>,
}

impl EmbeddingDoc {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("embedding doc serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, EmbeddingError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EmbeddingError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), EmbeddingError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Dense chain list for a graph with `num_logical` nodes. Logical nodes
    /// missing from the document get empty chains.
    pub fn chains_for(&self, num_logical: usize) -> Result<Vec<Vec<usize>>, EmbeddingError> {
        let mut out = vec![Vec::new(); num_logical];
        let num_nodes = self.topology.num_nodes();
        for (&v, chain) in &self.chains {
            if v >= num_logical {
                return Err(EmbeddingError::UnknownLogicalNode {
                    node: v,
                    num_nodes: num_logical,
                });
            }
            if let Some(&index) = chain.iter().find(|&&u| u >= num_nodes) {
                return Err(EmbeddingError::HardwareIndex { index, num_nodes });
            }
            out[v] = chain.clone();
        }
        Ok(out)
    }

    /// Strict conversion into an [`Embedding`]; fails on overlapping chains.
    pub fn into_embedding(self, num_logical: usize) -> Result<Embedding, EmbeddingError> {
        let chains = self.chains_for(num_logical)?;
        Embedding::from_chains(self.topology, chains)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chimera::NodeCoord;
    use crate::graph::LogicalGraph;

    fn t114() -> ChimeraTopology {
        ChimeraTopology::new(1, 1, 4).unwrap()
    }

    fn idx(t: ChimeraTopology, x: usize, y: usize, z: usize) -> usize {
        t.node_index(NodeCoord::new(x, y, z)).unwrap()
    }

    fn k3_example() -> Embedding {
        let t = t114();
        Embedding::from_chains(
            t,
            vec![
                vec![idx(t, 0, 0, 0)],
                vec![idx(t, 0, 0, 4)],
                vec![idx(t, 0, 0, 1), idx(t, 0, 0, 5)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn reverse_map_tracks_assignments() {
        let emb = k3_example();
        assert!(emb.audit());
        assert_eq!(emb.owner(5), Some(2));
        assert_eq!(emb.owner(2), None);
        assert!(emb.is_free(7));
        assert_eq!(emb.owner_slice()[3], FREE);
    }

    #[test]
    fn assign_rejects_overlap() {
        let mut emb = k3_example();
        assert!(emb.assign(2, 1).is_ok());
        assert!(matches!(
            emb.assign(0, 1),
            Err(EmbeddingError::AlreadyAssigned { hardware: 1, owner: 2 })
        ));
        assert!(matches!(emb.assign(5, 2), Err(EmbeddingError::UnknownLogicalNode { .. })));
        assert!(matches!(emb.assign(0, 8), Err(EmbeddingError::HardwareIndex { .. })));
        assert!(emb.audit());
    }

    #[test]
    fn metrics() {
        let emb = k3_example();
        assert_eq!(emb.qubit_count(), 4);
        assert_eq!(emb.chain_lengths(), vec![1, 1, 2]);
        assert_eq!(emb.min_enclosing_topology(), Some(t114()));
        let empty = Embedding::empty(t114(), 3);
        assert_eq!(empty.qubit_count(), 0);
        assert!(empty.is_empty());
        assert_eq!(empty.min_enclosing_topology(), None);

        let t = ChimeraTopology::new(4, 4, 2).unwrap();
        let emb = Embedding::from_chains(t, vec![vec![idx(t, 1, 2, 0)], vec![idx(t, 2, 3, 3)]]).unwrap();
        assert_eq!(emb.min_enclosing_topology(), Some(ChimeraTopology::new(2, 2, 2).unwrap()));
    }

    #[test]
    fn json_shape() {
        let emb = k3_example();
        assert_eq!(
            emb.to_json(),
            "{\"topology\":[1,1,4],\"chains\":{\"0\":[0],\"1\":[4],\"2\":[1,5]}}\n"
        );
        let doc = EmbeddingDoc::from_json(&emb.to_json()).unwrap();
        assert_eq!(doc.clone().into_embedding(3).unwrap(), emb);
        assert!(matches!(
            doc.chains_for(2),
            Err(EmbeddingError::UnknownLogicalNode { node: 2, .. })
        ));
    }

    #[test]
    fn doc_rejects_bad_indices() {
        let doc = EmbeddingDoc::from_json(r#"{"topology":[1,1,2],"chains":{"0":[4]}}"#).unwrap();
        assert!(matches!(doc.chains_for(1), Err(EmbeddingError::HardwareIndex { index: 4, .. })));
        assert!(EmbeddingDoc::from_json(r#"{"topology":[0,1,2],"chains":{}}"#).is_err());
        assert!(EmbeddingDoc::from_json("{").is_err());
    }

    #[test]
    fn overlapping_doc_is_representable() {
        let doc = EmbeddingDoc::from_json(r#"{"topology":[1,1,2],"chains":{"0":[0,2],"1":[2]}}"#).unwrap();
        assert!(doc.clone().into_embedding(2).is_err());
        let g = LogicalGraph::from_edges(2, [(0, 1)]).unwrap();
        let report = verify(&g, doc.topology, &doc.chains_for(2).unwrap()).unwrap();
        assert!(!report.feasible);
        assert!(report.violations.iter().any(|v| v.kind() == ViolationKind::Disjointness));
    }
}
