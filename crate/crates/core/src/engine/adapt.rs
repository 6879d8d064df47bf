//! Doubling the adaptive topology while carrying the embedding along.
//!
//! Cell `(x, y)` moves to `(2x, 2y)`. Each chain node gets a companion in
//! the neighboring semi cell along its coupler direction: `(2x + 1, 2y, z)`
//! for left-partite nodes, `(2x, 2y + 1, z)` for right-partite nodes. The
//! companions bridge old cells, so every chain stays connected and every
//! coupler between chains survives.

use crate::chimera::NodeCoord;
use crate::embedding::Embedding;

/// Returns the embedding expanded onto `T(2n, 2m, c)`. Every chain doubles.
pub fn topology_adapting(embedding: &Embedding) -> Embedding {
    let old = embedding.topology();
    let new = old.doubled();
    let mut out = Embedding::empty(new, embedding.num_logical());
    for (v, chain) in embedding.chains().iter().enumerate() {
        for &u in chain {
            let c = old.coord_unchecked(u);
            let moved = NodeCoord::new(2 * c.x, 2 * c.y, c.z);
            let companion = if old.is_left(c.z) {
                NodeCoord::new(2 * c.x + 1, 2 * c.y, c.z)
            } else {
                NodeCoord::new(2 * c.x, 2 * c.y + 1, c.z)
            };
            for w in [moved, companion] {
                out.assign(v, new.index_unchecked(w))
                    .expect("images of distinct nodes are distinct");
            }
        }
    }
    debug_assert!(out.audit());
    out
}
