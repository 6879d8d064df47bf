//! Complete-graph seed embedding used to start the run.

use crate::chimera::{ChimeraTopology, NodeCoord};

/// Chains of a native clique embedding of `K_k` with shore `c`, together with
/// the side length `t` of the square `T(t, t, c)` that hosts it.
///
/// Up to `c + 1` nodes fit in one cell: `{L0}`, `{Lj, Rj}` for the middle
/// nodes and `{R0}` for the last. Larger cliques use the triangle layout
/// over `t = ceil(k / c)` cells per side: node `i = b*c + r` owns the left
/// nodes `(0..=b, b, r)` of column `b` and the right nodes `(b, b..t, c + r)`
/// of row `b`, an L-shaped chain bent at diagonal cell `(b, b)`.
pub fn clique_chains(k: usize, shore: usize) -> (usize, Vec<Vec<NodeCoord>>) {
    assert!(k >= 1 && shore >= 1);
    let c = shore;
    if k <= c + 1 {
        let mut chains = vec![vec![NodeCoord::new(0, 0, 0)]];
        for j in 1..k.saturating_sub(1) {
            chains.push(vec![NodeCoord::new(0, 0, j), NodeCoord::new(0, 0, c + j)]);
        }
        if k >= 2 {
            chains.push(vec![NodeCoord::new(0, 0, c)]);
        }
        return (1, chains);
    }
    let t = k.div_ceil(c);
    let chains = (0..k)
        .map(|i| {
            let (b, r) = (i / c, i % c);
            let column = (0..=b).map(|x| NodeCoord::new(x, b, r));
            let row = (b..t).map(|y| NodeCoord::new(b, y, c + r));
            column.chain(row).collect()
        })
        .collect();
    (t, chains)
}

/// Smallest square topology hosting `clique_chains(k, shore)`.
pub fn seed_topology(k: usize, shore: usize) -> ChimeraTopology {
    let (t, _) = clique_chains(k, shore);
    ChimeraTopology::new(t, t, shore).expect("positive dimensions")
}
