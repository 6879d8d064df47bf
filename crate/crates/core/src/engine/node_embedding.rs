//! Placing one new logical node next to its already-embedded neighbors.
//!
//! A *clean path* from hardware node `u` to chain `φ(v)` is a path whose
//! nodes are all free except the last, which belongs to `φ(v)`. One
//! multi-source BFS per neighbor chain gives clean-path distances to every
//! free node. The free node minimizing the summed distance becomes the
//! center of the new chain, and the free nodes along each path are split
//! between the new chain and the neighbor chain in proportion to their
//! degrees in `P`.

use std::collections::BTreeMap;
use std::ops::Range;

use rustc_hash::FxHashMap;

use crate::embedding::{Embedding, FREE};
use crate::graph::LogicalGraph;

pub(crate) const UNREACHED: u32 = u32::MAX;

/// Clean-path distances and BFS parents towards one chain.
#[derive(Debug, Clone)]
pub struct CleanPathField {
    target: usize,
    dist: Vec<u32>,
    parent: Vec<u32>,
}

impl CleanPathField {
    /// BFS from every node of `φ(target)` through free nodes only. Sources are
    /// queued in ascending index order and neighbors are scanned in ascending
    /// index order, so parents are reproducible.
    pub fn compute(embedding: &Embedding, target: usize) -> Self {
        let topology = embedding.topology();
        let owner = embedding.owner_slice();
        let mut dist = vec![UNREACHED; topology.num_nodes()];
        let mut parent = vec![UNREACHED; topology.num_nodes()];
        let mut queue = embedding.chain(target).to_vec();
        queue.sort_unstable();
        for &s in &queue {
            dist[s] = 0;
            parent[s] = s as u32;
        }
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            topology.for_each_neighbor(u, |w| {
                if dist[w] == UNREACHED && owner[w] == FREE {
                    dist[w] = dist[u] + 1;
                    parent[w] = u as u32;
                    queue.push(w);
                }
            });
        }
        Self { target, dist, parent }
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// Clean-path length from `u` to the chain; `Some(0)` on the chain itself.
    pub fn distance(&self, u: usize) -> Option<u32> {
        match self.dist[u] {
            UNREACHED => None,
            d => Some(d),
        }
    }

    /// `z_0 = u, z_1, ..., z_L` with `z_L` in the chain.
    pub fn path_from(&self, u: usize) -> Option<Vec<usize>> {
        if self.dist[u] == UNREACHED {
            return None;
        }
        let mut path = vec![u];
        let mut cur = u;
        while self.dist[cur] > 0 {
            cur = self.parent[cur] as usize;
            path.push(cur);
        }
        Some(path)
    }
}

/// Summed distance and number of searches that reached a node.
#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    sum: u64,
    count: u32,
}

/// Reusable search buffers. Only the entries touched by the previous search
/// are reset, so a search costs time proportional to the region it explores.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    tally: Vec<Tally>,
    touched: Vec<u32>,
    /// Per search: visited or occupied nodes as a bitset.
    seen: Vec<Vec<u64>>,
    /// Per search: visited nodes in BFS order, and for each the position
    /// of its parent in the same list (its own position for chain nodes).
    visited: Vec<Vec<u32>>,
    parents: Vec<Vec<u32>>,
}

impl Workspace {
    fn prepare(&mut self, num_nodes: usize, searches: usize) {
        if self.tally.len() != num_nodes {
            *self = Self {
                tally: vec![Tally::default(); num_nodes],
                ..Self::default()
            };
        }
        while self.seen.len() < searches {
            self.seen.push(vec![0; num_nodes.div_ceil(64)]);
            self.visited.push(Vec::new());
            self.parents.push(Vec::new());
        }
    }

    fn clear(&mut self) {
        for &u in &self.touched {
            self.tally[u as usize] = Tally::default();
        }
        self.touched.clear();
        // `seen` is overwritten at the start of each search
        self.visited.iter_mut().for_each(Vec::clear);
        self.parents.iter_mut().for_each(Vec::clear);
    }

    /// Clean path `center, ..., chain node` found by search `i`.
    fn path(&self, i: usize, center: usize) -> Vec<usize> {
        let (visited, parents) = (&self.visited[i], &self.parents[i]);
        let mut k = visited
            .iter()
            .position(|&u| u as usize == center)
            .expect("center was reached by every search");
        let mut path = vec![center];
        while parents[k] as usize != k {
            k = parents[k] as usize;
            path.push(visited[k] as usize);
        }
        path
    }
}

/// Chains to add for one new node. Empty when no free node reaches every
/// neighbor chain by clean paths (the isolated case).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Additional {
    pub chains: BTreeMap<usize, Vec<usize>>,
}

impl Additional {
    /// True for the empty embedding: no chain receives any node.
    pub fn is_empty(&self) -> bool {
        self.chains.values().all(Vec::is_empty)
    }

    pub fn node_count(&self) -> usize {
        self.chains.values().map(Vec::len).sum()
    }
}

/// Free node minimizing the summed clean-path distance to every listed
/// chain, lowest index on ties. `None` when no free node reaches them all.
pub fn find_center(embedding: &Embedding, targets: &[usize]) -> Option<usize> {
    find_center_with(&mut Workspace::default(), embedding, targets)
}

/// [`find_center`] with caller-owned buffers.
pub fn find_center_with(ws: &mut Workspace, embedding: &Embedding, targets: &[usize]) -> Option<usize> {
    let center = search(ws, embedding, targets);
    ws.clear();
    center
}

/// Marks `w` as seen and queues it with parent position `k`, unless it was
/// seen before.
#[inline(always)]
fn enter_one(bits: &mut [u64], w: usize, k: u32, queue: &mut Vec<u32>, parents: &mut Vec<u32>) {
    let (word, bit) = (w / 64, 1u64 << (w % 64));
    if bits[word] & bit == 0 {
        bits[word] |= bit;
        queue.push(w as u32);
        parents.push(k);
    }
}

/// [`enter_one`] for every node of `range`, in ascending order.
#[inline(always)]
fn enter(bits: &mut [u64], range: Range<usize>, k: u32, queue: &mut Vec<u32>, parents: &mut Vec<u32>) {
    let word = range.start / 64;
    if range.end - 1 < (word + 1) * 64 {
        // one word covers the range, which holds for a cell's opposite shore
        // when the shore size is a power of two
        let mask = (u64::MAX >> (64 - range.len())) << (range.start % 64);
        let mut fresh = mask & !bits[word];
        bits[word] |= fresh;
        while fresh != 0 {
            queue.push((word * 64) as u32 + fresh.trailing_zeros());
            parents.push(k);
            fresh &= fresh - 1;
        }
    } else {
        for w in range {
            enter_one(bits, w, k, queue, parents);
        }
    }
}

/// Runs one BFS per chain in lockstep, one level at a time, recording
/// visit order and parents in `ws`.
///
/// After level `r`, a node still missing `m` distances has a summed distance
/// of at least `known + m * (r + 1)`; the search stops once that bound
/// exceeds the best complete sum, so only the region around the chains is
/// explored. Levels are processed in queue order with neighbors in ascending
/// order, so parents match a plain FIFO BFS from the same sources.
fn search(ws: &mut Workspace, embedding: &Embedding, targets: &[usize]) -> Option<usize> {
    if targets.is_empty() || targets.iter().any(|&v| embedding.chain(v).is_empty()) {
        return None;
    }
    let topology = embedding.topology();
    let a = targets.len();
    ws.prepare(topology.num_nodes(), a);
    let Workspace {
        tally,
        touched,
        seen,
        visited,
        parents,
        ..
    } = ws;
    let test = |bits: &[u64], u: u32| bits[u as usize / 64] >> (u % 64) & 1 == 1;

    // visited[i] doubles as the BFS queue; frontier[i] is the range of the
    // level just finished
    let mut frontier: Vec<Range<usize>> = Vec::with_capacity(a);
    for (i, &v) in targets.iter().enumerate() {
        let chain = embedding.chain(v);
        visited[i].extend(chain.iter().map(|&u| u as u32));
        visited[i].sort_unstable();
        parents[i].extend(0..chain.len() as u32);
        // occupied nodes are never entered, so they start out seen
        seen[i].copy_from_slice(embedding.occupied_bits());
        frontier.push(0..chain.len());
    }

    // smallest known sum among incomplete nodes per missing count; entries
    // are not removed when a node moves on, so this is a lower bound that a
    // rescan of the touched nodes tightens
    let mut min_sum: Vec<u64> = vec![u64::MAX; a];
    let mut best: Option<(u64, u32)> = None;
    let mut exhausted: Vec<usize> = Vec::new();
    let mut live = a;
    let mut since_rescan = 0usize;

    let mut level: u64 = 0;
    loop {
        level += 1;
        for i in 0..a {
            if frontier[i].is_empty() {
                continue;
            }
            let (bits, queue, up) = (&mut seen[i], &mut visited[i], &mut parents[i]);
            let start = queue.len();
            for k in frontier[i].clone() {
                let (before, cell, after) = topology.neighbor_parts(queue[k] as usize);
                let k = k as u32;
                if let Some(w) = before {
                    enter_one(bits, w, k, queue, up);
                }
                enter(bits, cell, k, queue, up);
                if let Some(w) = after {
                    enter_one(bits, w, k, queue, up);
                }
            }
            for &w in &queue[start..] {
                let t = &mut tally[w as usize];
                if t.count == 0 {
                    touched.push(w);
                }
                t.sum += level;
                t.count += 1;
                let (s, missing) = (t.sum, a - t.count as usize);
                if missing == 0 {
                    let cand = (s, w);
                    if best.is_none_or(|b| cand < b) {
                        best = Some(cand);
                    }
                } else {
                    min_sum[missing] = min_sum[missing].min(s);
                }
            }
            since_rescan += queue.len() - start;
            frontier[i] = start..queue.len();
            if frontier[i].is_empty() {
                exhausted.push(i);
                live -= 1;
            }
        }

        if live == 0 {
            return best.map(|(_, u)| u as usize);
        }
        // every distance still unknown is at least level + 1
        let unknown = level + 1;
        let untouched = if exhausted.is_empty() {
            a as u64 * unknown
        } else {
            u64::MAX
        };
        let bound = |min_sum: &[u64]| {
            min_sum
                .iter()
                .enumerate()
                .skip(1)
                .filter(|&(_, &s)| s != u64::MAX)
                .map(|(missing, &s)| s + missing as u64 * unknown)
                .fold(untouched, u64::min)
        };
        let settled = |lower: u64| match best {
            Some((s, _)) => lower > s,
            None => lower == u64::MAX,
        };
        let mut lower = bound(&min_sum);
        if !settled(lower) && (best.is_some() || !exhausted.is_empty()) && since_rescan >= touched.len() {
            since_rescan = 0;
            min_sum.fill(u64::MAX);
            for &u in touched.iter() {
                let t = tally[u as usize];
                let missing = a - t.count as usize;
                if missing == 0 || exhausted.iter().any(|&i| !test(&seen[i], u)) {
                    continue;
                }
                min_sum[missing] = min_sum[missing].min(t.sum);
            }
            lower = bound(&min_sum);
        }
        if settled(lower) {
            return best.map(|(_, u)| u as usize);
        }
    }
}

/// Finds chains that attach `new_node` to its embedded neighbors.
///
/// `embedded[v]` marks the set `S`. The returned chains are disjoint from the
/// current embedding; merging them keeps the embedding feasible for
/// `P[S ∪ {new_node}]`.
pub fn node_embedding(
    graph: &LogicalGraph,
    embedding: &Embedding,
    embedded: &[bool],
    new_node: usize,
) -> Additional {
    node_embedding_with(&mut Workspace::default(), graph, embedding, embedded, new_node)
}

/// [`node_embedding`] with caller-owned buffers.
pub fn node_embedding_with(
    ws: &mut Workspace,
    graph: &LogicalGraph,
    embedding: &Embedding,
    embedded: &[bool],
    new_node: usize,
) -> Additional {
    let anchors: Vec<usize> = graph
        .neighbors(new_node)
        .iter()
        .copied()
        .filter(|&v| embedded[v])
        .collect();
    let Some(center) = search(ws, embedding, &anchors) else {
        ws.clear();
        return Additional::default();
    };
    let paths: Vec<Vec<usize>> = (0..anchors.len()).map(|i| ws.path(i, center)).collect();
    ws.clear();

    // how many paths pass through each interior node
    let mut crossings: FxHashMap<usize, u32> = FxHashMap::default();
    for path in &paths {
        for &z in &path[1..path.len() - 1] {
            *crossings.entry(z).or_default() += 1;
        }
    }

    let new_degree = graph.degree(new_node);
    let mut new_chain = vec![center];
    let mut out = Additional::default();
    for (&v, path) in anchors.iter().zip(&paths) {
        let len = path.len() - 1;
        let last_shared = (1..len).rev().find(|&i| crossings[&path[i]] > 1).unwrap_or(0);
        let degree = graph.degree(v);
        let span = len - 1 - last_shared;
        let delta = new_degree * span / (new_degree + degree);
        let cut = last_shared + delta;
        for &z in &path[1..=cut] {
            if !new_chain.contains(&z) {
                new_chain.push(z);
            }
        }
        let extension: Vec<usize> = path[cut + 1..len].to_vec();
        if !extension.is_empty() {
            out.chains.insert(v, extension);
        }
    }
    out.chains.insert(new_node, new_chain);
    out
}
