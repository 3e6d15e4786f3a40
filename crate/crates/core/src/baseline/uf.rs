//! Batch union-find decoding of one window.

use crate::dsu::DisjointSets;
use crate::graph::{EdgeRef, LayerTemplate, NodeRef};

/// A finite window of the decoding graph, `sheets` sheets starting at
/// `bottom`, optionally capped by a temporal boundary.
///
/// Nodes are indexed `row * sheet_size + j`; temporal boundary nodes (one per
/// top-sheet detector) follow. Edges are the intra-sheet edges of every row,
/// then the up edges between rows, then the temporal boundary edges.
#[derive(Debug, Clone)]
pub struct BatchWindow {
    pub bottom: i64,
    pub sheets: usize,
    sheet_size: usize,
    is_boundary: Vec<bool>,
    edges: Vec<(u32, u32)>,
    edge_refs: Vec<Option<EdgeRef>>,
    adjacency: Vec<Vec<(u32, u32)>>,
    /// Current defect bit of every node.
    pub syndrome: Vec<bool>,
}

impl BatchWindow {
    pub fn new(template: &LayerTemplate, bottom: i64, sheets: usize, temporal_boundary: bool) -> Self {
        let s = template.sheet_size();
        let mut is_boundary: Vec<bool> = (0..sheets)
            .flat_map(|_| template.nodes.iter().map(|n| n.is_boundary()))
            .collect();
        let mut edges = Vec::new();
        let mut edge_refs = Vec::new();
        for row in 0..sheets {
            for (k, e) in template.intra_edges() {
                edges.push(((row * s + e.a) as u32, (row * s + e.b) as u32));
                edge_refs.push(Some(EdgeRef::new(bottom + row as i64, k)));
            }
        }
        for row in 0..sheets.saturating_sub(1) {
            for (k, e) in template.up_edges() {
                edges.push(((row * s + e.a) as u32, ((row + 1) * s + e.b) as u32));
                edge_refs.push(Some(EdgeRef::new(bottom + row as i64, k)));
            }
        }
        if temporal_boundary && sheets > 0 {
            let top = (sheets - 1) * s;
            for (j, n) in template.nodes.iter().enumerate() {
                if n.is_detector() {
                    let tb = is_boundary.len();
                    is_boundary.push(true);
                    edges.push(((top + j) as u32, tb as u32));
                    edge_refs.push(None);
                }
            }
        }
        let mut adjacency = vec![Vec::new(); is_boundary.len()];
        for (i, &(a, b)) in edges.iter().enumerate() {
            adjacency[a as usize].push((b, i as u32));
            adjacency[b as usize].push((a, i as u32));
        }
        BatchWindow {
            bottom,
            sheets,
            sheet_size: s,
            syndrome: vec![false; is_boundary.len()],
            is_boundary,
            edges,
            edge_refs,
            adjacency,
        }
    }

    pub fn node_count(&self) -> usize {
        self.is_boundary.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        let (a, b) = self.edges[e];
        (a as usize, b as usize)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency[v].iter().map(|&(n, e)| (n as usize, e as usize))
    }

    /// Spacetime identity of edge `e`; `None` for temporal boundary edges.
    pub fn edge_ref(&self, e: usize) -> Option<EdgeRef> {
        self.edge_refs[e]
    }

    /// Window node of a spacetime node, if it lies in the window.
    pub fn node_index(&self, node: NodeRef) -> Option<usize> {
        let row = node.sheet - self.bottom;
        (0..self.sheets as i64)
            .contains(&row)
            .then(|| row as usize * self.sheet_size + node.node as usize)
    }

    /// Spacetime node of window node `v` (temporal boundary nodes excluded).
    pub fn node_ref(&self, v: usize) -> Option<NodeRef> {
        (v < self.sheets * self.sheet_size)
            .then(|| NodeRef::new(self.bottom + (v / self.sheet_size) as i64, v % self.sheet_size))
    }

    pub fn set_defect(&mut self, v: usize, defect: bool) {
        self.syndrome[v] = defect && !self.is_boundary[v];
    }

    pub fn defects(&self) -> impl Iterator<Item = usize> + '_ {
        self.syndrome.iter().enumerate().filter(|(_, &d)| d).map(|(v, _)| v)
    }

    /// Syndrome left after flipping `correction`.
    pub fn residual_syndrome(&self, correction: &[usize]) -> Vec<bool> {
        let mut s = self.syndrome.clone();
        for &e in correction {
            let (a, b) = self.endpoints(e);
            s[a] ^= true;
            s[b] ^= true;
        }
        for (bit, &boundary) in s.iter_mut().zip(&self.is_boundary) {
            *bit &= !boundary;
        }
        s
    }
}

/// Cluster forest built by union-find growth.
#[derive(Debug, Clone)]
pub struct UfClusterForest {
    sets: DisjointSets,
    odd: Vec<bool>,
    boundary: Vec<bool>,
    /// Growth of every edge in half edges (0, 1, 2).
    pub growth: Vec<u8>,
    pub rounds: usize,
}

impl UfClusterForest {
    pub fn new(window: &BatchWindow) -> Self {
        let n = window.node_count();
        UfClusterForest {
            sets: DisjointSets::new(n),
            odd: window.syndrome.clone(),
            boundary: (0..n).map(|v| window.is_boundary(v)).collect(),
            growth: vec![0; window.edge_count()],
            rounds: 0,
        }
    }

    /// A cluster is active iff it has odd defect parity and no boundary.
    pub fn is_active(&mut self, v: usize) -> bool {
        let r = self.sets.find(v);
        self.odd[r] && !self.boundary[r]
    }

    pub fn same_cluster(&mut self, a: usize, b: usize) -> bool {
        self.sets.find(a) == self.sets.find(b)
    }

    /// Grow every active cluster by half an edge in all directions and merge
    /// clusters joined by newly full edges. Returns false once no cluster is
    /// active.
    pub fn grow_round(&mut self, window: &BatchWindow) -> bool {
        let n = window.node_count();
        let active: Vec<bool> = (0..n).map(|v| self.is_active(v)).collect();
        if !active.iter().any(|&a| a) {
            return false;
        }
        let mut newly_full = Vec::new();
        for e in 0..window.edge_count() {
            if self.growth[e] >= 2 {
                continue;
            }
            let (a, b) = window.endpoints(e);
            let add = u8::from(active[a]) + u8::from(active[b]);
            if add > 0 {
                self.growth[e] = (self.growth[e] + add).min(2);
                if self.growth[e] == 2 {
                    newly_full.push(e);
                }
            }
        }
        for e in newly_full {
            let (a, b) = window.endpoints(e);
            if let Some((root, absorbed)) = self.sets.union(a, b) {
                self.odd[root] ^= self.odd[absorbed];
                self.boundary[root] |= self.boundary[absorbed];
            }
        }
        self.rounds += 1;
        true
    }
}

/// Union-find decoding: grow to inactivity, then peel a spanning forest of
/// each cluster. Returns the tentative correction as window edge indices.
pub fn uf_decode(window: &BatchWindow) -> Vec<usize> {
    let mut forest = UfClusterForest::new(window);
    // every growth round makes progress; bound it anyway
    let limit = 2 * window.node_count() + 2;
    while forest.rounds < limit && forest.grow_round(window) {}
    peel(window, &forest.growth)
}

/// Peel spanning trees of the clusters formed by fully grown edges. Trees are
/// grown breadth-first from the cluster's boundary nodes or, failing that,
/// from its first defect.
pub fn peel(window: &BatchWindow, growth: &[u8]) -> Vec<usize> {
    let n = window.node_count();
    let mut visited = vec![false; n];
    let mut parent_edge: Vec<Option<usize>> = vec![None; n];
    let mut flag = window.syndrome.clone();
    let mut correction = Vec::new();

    let mut component = vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        component[start] = id;
        let mut stack = vec![start];
        let mut members = Vec::new();
        while let Some(v) = stack.pop() {
            members.push(v);
            for (u, e) in window.neighbors(v) {
                if growth[e] >= 2 && component[u] == usize::MAX {
                    component[u] = id;
                    stack.push(u);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }

    for members in components {
        if !members.iter().any(|&v| flag[v]) {
            continue;
        }
        let mut roots: Vec<usize> = members.iter().copied().filter(|&v| window.is_boundary(v)).collect();
        if roots.is_empty() {
            roots.push(*members.iter().find(|&&v| flag[v]).expect("has a defect"));
        }
        let mut order = Vec::with_capacity(members.len());
        let mut queue = std::collections::VecDeque::new();
        for r in roots {
            visited[r] = true;
            queue.push_back(r);
        }
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for (u, e) in window.neighbors(v) {
                if growth[e] >= 2 && !visited[u] {
                    visited[u] = true;
                    parent_edge[u] = Some(e);
                    queue.push_back(u);
                }
            }
        }
        for &v in order.iter().rev() {
            if !flag[v] {
                continue;
            }
            if let Some(e) = parent_edge[v] {
                let (a, b) = window.endpoints(e);
                let parent = if a == v { b } else { a };
                correction.push(e);
                flag[v] = false;
                flag[parent] ^= true;
            }
        }
    }
    correction.sort_unstable();
    correction
}
