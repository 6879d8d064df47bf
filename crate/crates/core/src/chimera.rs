//! Implicit Chimera hardware topology `T(n, m, c)`.
//!
//! The hardware graph is an `n x m` grid of `K_{c,c}` unit cells. A node is
//! addressed by `(x, y, z)`: row `x`, column `y` and bipartite index `z`.
//! Indices `z < c` form the left partite, `z >= c` the right partite.
//!
//! * every left node is joined to every right node of its own cell;
//! * left node `(x, y, z)` is joined to `(x - 1, y, z)` and `(x + 1, y, z)`
//!   (column couplers);
//! * right node `(x, y, z)` is joined to `(x, y - 1, z)` and `(x, y + 1, z)`
//!   (row couplers).
//!
//! Edges are never materialized. The canonical flat node index is
//! row-major over cells, then `z`:
//!
//! ```text
//! index(x, y, z) = (x * m + y) * 2c + z
//! ```
//!
//! This layout is the node identity used by every file format in the crate.

use std::ops::Range;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChimeraError {
    #[error("topology dimensions must be positive, got T({rows},{cols},{shore})")]
    EmptyDimension {
        rows: usize,
        cols: usize,
        shore: usize,
    },
    #[error("coordinate ({x},{y},{z}) is outside T({rows},{cols},{shore})")]
    CoordOutOfRange {
        x: usize,
        y: usize,
        z: usize,
        rows: usize,
        cols: usize,
        shore: usize,
    },
    #[error("node index {index} is outside a topology with {num_nodes} nodes")]
    IndexOutOfRange { index: usize, num_nodes: usize },
}

/// Hardware node coordinate `(x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeCoord {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl NodeCoord {
    pub const fn new(x: usize, y: usize, z: usize) -> Self {
        Self { x, y, z }
    }
}

impl From<(usize, usize, usize)> for NodeCoord {
    fn from((x, y, z): (usize, usize, usize)) -> Self {
        Self { x, y, z }
    }
}

/// The parameterized Chimera template `T(rows, cols, shore)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[usize; 3]", into = "[usize; 3]")]
pub struct ChimeraTopology {
    rows: usize,
    cols: usize,
    shore: usize,
}

impl TryFrom<[usize; 3]> for ChimeraTopology {
    type Error = ChimeraError;

    fn try_from([rows, cols, shore]: [usize; 3]) -> Result<Self, Self::Error> {
        Self::new(rows, cols, shore)
    }
}

impl From<ChimeraTopology> for [usize; 3] {
    fn from(t: ChimeraTopology) -> Self {
        [t.rows, t.cols, t.shore]
    }
}

impl std::fmt::Display for ChimeraTopology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "T({},{},{})", self.rows, self.cols, self.shore)
    }
}

impl ChimeraTopology {
    pub fn new(rows: usize, cols: usize, shore: usize) -> Result<Self, ChimeraError> {
        if rows == 0 || cols == 0 || shore == 0 {
            return Err(ChimeraError::EmptyDimension { rows, cols, shore });
        }
        Ok(Self { rows, cols, shore })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shore(&self) -> usize {
        self.shore
    }

    /// Nodes per unit cell, `2c`.
    pub fn cell_size(&self) -> usize {
        2 * self.shore
    }

    pub fn num_nodes(&self) -> usize {
        self.rows * self.cols * self.cell_size()
    }

    /// Closed-form edge count: intra-cell bicliques plus column and row couplers.
    pub fn num_edges(&self) -> usize {
        let (n, m, c) = (self.rows, self.cols, self.shore);
        c * c * n * m + c * (n - 1) * m + c * n * (m - 1)
    }

    /// The doubled topology `T(2n, 2m, c)`.
    pub fn doubled(&self) -> Self {
        Self {
            rows: 2 * self.rows,
            cols: 2 * self.cols,
            shore: self.shore,
        }
    }

    pub fn is_left(&self, z: usize) -> bool {
        z < self.shore
    }

    pub fn contains(&self, u: NodeCoord) -> bool {
        u.x < self.rows && u.y < self.cols && u.z < self.cell_size()
    }

    fn check(&self, u: NodeCoord) -> Result<(), ChimeraError> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(ChimeraError::CoordOutOfRange {
                x: u.x,
                y: u.y,
                z: u.z,
                rows: self.rows,
                cols: self.cols,
                shore: self.shore,
            })
        }
    }

    pub fn node_index(&self, u: NodeCoord) -> Result<usize, ChimeraError> {
        self.check(u)?;
        Ok(self.index_unchecked(u))
    }

    pub fn coord_of(&self, index: usize) -> Result<NodeCoord, ChimeraError> {
        if index >= self.num_nodes() {
            return Err(ChimeraError::IndexOutOfRange {
                index,
                num_nodes: self.num_nodes(),
            });
        }
        Ok(self.coord_unchecked(index))
    }

    #[inline]
    pub(crate) fn index_unchecked(&self, u: NodeCoord) -> usize {
        (u.x * self.cols + u.y) * self.cell_size() + u.z
    }

    #[inline]
    pub(crate) fn coord_unchecked(&self, index: usize) -> NodeCoord {
        let cs = self.cell_size();
        let cell = index / cs;
        NodeCoord {
            x: cell / self.cols,
            y: cell % self.cols,
            z: index % cs,
        }
    }

    /// Neighbors of `u`, in ascending flat-index order.
    pub fn neighbors(&self, u: NodeCoord) -> Result<Vec<NodeCoord>, ChimeraError> {
        self.check(u)?;
        let mut out = Vec::with_capacity(self.shore + 2);
        self.for_each_neighbor(self.index_unchecked(u), |v| out.push(self.coord_unchecked(v)));
        Ok(out)
    }

    pub fn degree(&self, u: NodeCoord) -> Result<usize, ChimeraError> {
        Ok(self.neighbors(u)?.len())
    }

    /// Constant-time adjacency test.
    pub fn adjacent(&self, u: NodeCoord, v: NodeCoord) -> Result<bool, ChimeraError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.adjacent_coords(u, v))
    }

    /// Adjacency on flat indices. Out-of-range indices are never adjacent.
    pub fn adjacent_index(&self, a: usize, b: usize) -> bool {
        let n = self.num_nodes();
        if a >= n || b >= n {
            return false;
        }
        self.adjacent_coords(self.coord_unchecked(a), self.coord_unchecked(b))
    }

    fn adjacent_coords(&self, u: NodeCoord, v: NodeCoord) -> bool {
        let (ul, vl) = (self.is_left(u.z), self.is_left(v.z));
        if u.x == v.x && u.y == v.y {
            return ul != vl;
        }
        if u.z != v.z {
            return false;
        }
        if ul {
            u.y == v.y && u.x.abs_diff(v.x) == 1
        } else {
            u.x == v.x && u.y.abs_diff(v.y) == 1
        }
    }

    /// Calls `f` on every neighbor of flat index `u` in ascending index order.
    /// `u` must be in range.
    #[inline]
    pub(crate) fn for_each_neighbor(&self, u: usize, mut f: impl FnMut(usize)) {
        let (before, cell, after) = self.neighbor_parts(u);
        before.into_iter().chain(cell).chain(after).for_each(&mut f);
    }

    /// Neighbors of flat index `u` as the inter-cell neighbor below `u`, the
    /// opposite shore of its own cell, and the inter-cell neighbor above `u`.
    /// Read in that order they are ascending.
    #[inline]
    pub(crate) fn neighbor_parts(&self, u: usize) -> (Option<usize>, Range<usize>, Option<usize>) {
        let c = self.shore;
        let cs = self.cell_size();
        let row = self.cols * cs;
        let z = fast_rem(u, cs);
        let base = u - z;
        if z < c {
            let up = (u >= row).then(|| u - row);
            let down = (u + row < self.num_nodes()).then(|| u + row);
            (up, base + c..base + cs, down)
        } else {
            let in_row = fast_rem(u, row);
            let left = (in_row >= cs).then(|| u - cs);
            let right = (in_row + cs < row).then(|| u + cs);
            (left, base..base + c, right)
        }
    }
}

/// `u % d`, avoiding the division for powers of two.
#[inline]
fn fast_rem(u: usize, d: usize) -> usize {
    if d.is_power_of_two() {
        u & (d - 1)
    } else {
        u % d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(n: usize, m: usize, c: usize) -> ChimeraTopology {
        ChimeraTopology::new(n, m, c).unwrap()
    }

    fn set(v: Vec<NodeCoord>) -> std::collections::BTreeSet<NodeCoord> {
        v.into_iter().collect()
    }

    #[test]
    fn corner_node_in_two_by_two() {
        let got = t(2, 2, 4).neighbors(NodeCoord::new(0, 0, 0)).unwrap();
        let want = [(0, 0, 4), (0, 0, 5), (0, 0, 6), (0, 0, 7), (1, 0, 0)]
            .into_iter()
            .map(NodeCoord::from)
            .collect();
        assert_eq!(set(got), want);
    }

    #[test]
    fn single_cell_has_no_couplers() {
        let got = t(1, 1, 4).neighbors(NodeCoord::new(0, 0, 0)).unwrap();
        let want = [(0, 0, 4), (0, 0, 5), (0, 0, 6), (0, 0, 7)]
            .into_iter()
            .map(NodeCoord::from)
            .collect();
        assert_eq!(set(got), want);
    }

    #[test]
    fn degree_between_c_and_c_plus_two() {
        let topo = t(3, 4, 3);
        for i in 0..topo.num_nodes() {
            let d = topo.degree(topo.coord_of(i).unwrap()).unwrap();
            assert!((3..=5).contains(&d), "node {i} has degree {d}");
        }
        assert_eq!(topo.degree(NodeCoord::new(1, 1, 0)).unwrap(), 5);
    }

    #[test]
    fn index_layout() {
        assert_eq!(t(1, 1, 1).node_index(NodeCoord::new(0, 0, 0)).unwrap(), 0);
        let topo = t(3, 3, 4);
        let all: Vec<usize> = (0..3)
            .flat_map(|x| (0..3).flat_map(move |y| (0..8).map(move |z| NodeCoord::new(x, y, z))))
            .map(|u| topo.node_index(u).unwrap())
            .collect();
        let mut sorted = all.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..72).collect::<Vec<_>>());
        assert_eq!(topo.node_index(NodeCoord::new(1, 2, 3)).unwrap(), (3 + 2) * 8 + 3);
    }

    #[test]
    fn bijection_roundtrip() {
        let topo = t(2, 2, 4);
        for i in 0..topo.num_nodes() {
            let u = topo.coord_of(i).unwrap();
            assert_eq!(topo.node_index(u).unwrap(), i);
        }
    }

    #[test]
    fn adjacency_examples() {
        let a = |topo: ChimeraTopology, u: (usize, usize, usize), v: (usize, usize, usize)| {
            topo.adjacent(u.into(), v.into()).unwrap()
        };
        assert!(a(t(1, 1, 4), (0, 0, 0), (0, 0, 4)));
        assert!(!a(t(1, 1, 4), (0, 0, 0), (0, 0, 1)));
        assert!(a(t(1, 2, 4), (0, 0, 4), (0, 1, 4)));
        // left partite does not couple along rows
        assert!(!a(t(1, 2, 4), (0, 0, 0), (0, 1, 0)));
        assert!(!a(t(2, 2, 4), (0, 0, 0), (0, 0, 0)));
    }

    #[test]
    fn invalid_inputs() {
        assert!(ChimeraTopology::new(0, 1, 1).is_err());
        let topo = t(2, 2, 2);
        assert!(matches!(
            topo.neighbors(NodeCoord::new(2, 0, 0)),
            Err(ChimeraError::CoordOutOfRange { .. })
        ));
        assert!(topo.node_index(NodeCoord::new(0, 0, 4)).is_err());
        assert!(matches!(
            topo.coord_of(16),
            Err(ChimeraError::IndexOutOfRange { index: 16, num_nodes: 16 })
        ));
        assert!(!topo.adjacent_index(0, 99));
    }

    #[test]
    fn neighbor_order_is_ascending() {
        let topo = t(3, 3, 2);
        for i in 0..topo.num_nodes() {
            let mut prev = None;
            topo.for_each_neighbor(i, |v| {
                assert!(prev.map_or(true, |p| p < v));
                assert!(topo.adjacent_index(i, v));
                prev = Some(v);
            });
        }
    }

    #[test]
    fn serde_as_triple() {
        let s = serde_json::to_string(&t(2, 3, 4)).unwrap();
        assert_eq!(s, "[2,3,4]");
        let back: ChimeraTopology = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t(2, 3, 4));
        assert!(serde_json::from_str::<ChimeraTopology>("[0,1,1]").is_err());
    }
}
