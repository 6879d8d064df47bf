//! Minor embedding of logical problem graphs into Chimera hardware graphs
//! with an adaptive, on-demand doubling topology.
//!
//! * [`chimera`]: the implicit `T(n, m, c)` hardware topology.
//! * [`graph`]: logical graphs, generators and densest-subgraph selection.
//! * [`embedding`]: chains, the JSON format, the feasibility verifier and
//!   an edge-contraction reference check.
//! * [`engine`]: the embedding algorithm.
//! * [`bench`]: sweeps over generated instances with CSV/JSON output.
//! * [`cli`]: the `atom` command-line front end.

pub mod bench;
pub mod chimera;
pub mod cli;
pub mod embedding;
pub mod engine;
pub mod graph;

pub use chimera::{ChimeraTopology, NodeCoord};
pub use embedding::{Embedding, EmbeddingDoc, FeasibilityReport, Violation, ViolationKind};
pub use engine::{embed, EmbedOutcome, EmbedReport, EngineConfig, EngineError};
pub use graph::LogicalGraph;
