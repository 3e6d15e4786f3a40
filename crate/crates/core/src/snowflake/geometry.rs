//! Node and edge layout of the viewing window.
//!
//! Window nodes are indexed `row * sheet_size + j` with row 0 the bottom
//! sheet. Window edges are the intra-sheet edges of every row followed by the
//! up edges between consecutive rows; the up edges of row `r` join row `r` to
//! row `r + 1`.

use std::sync::Arc;

use crate::graph::{Direction, LayerTemplate, NodeDescriptor};

/// Cluster identifier. Real node IDs and the IDs of nodes just below the
/// window share one ordered space; `RESET` is the unrooting sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cid(pub u32);

impl Cid {
    pub const RESET: Cid = Cid(u32::MAX);

    pub fn is_reset(self) -> bool {
        self == Cid::RESET
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub node: u32,
    pub edge: u32,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowEdge {
    pub a: u32,
    pub b: u32,
    /// Row of `a`; for up edges `b` is one row higher.
    pub row: u32,
    pub template_edge: u32,
    /// Endpoint with the lower ID, which stores the edge variables.
    pub owner: u32,
}

#[derive(Debug)]
pub struct WindowGeometry {
    pub template: LayerTemplate,
    pub height: usize,
    pub sheet_size: usize,
    boundary_rank: Vec<u32>,
    detector_rank: Vec<u32>,
    boundaries_per_sheet: u32,
    detectors_per_sheet: u32,
    pub edges: Vec<WindowEdge>,
    /// Neighbors in ascending ID order.
    pub neighbors: Vec<Vec<Neighbor>>,
    toward: Vec<[Option<(u32, u32)>; 13]>,
    intra_per_row: usize,
    up_per_row: usize,
}

impl WindowGeometry {
    pub fn new(template: LayerTemplate, height: usize) -> Arc<Self> {
        assert!(height >= 2, "window needs at least two sheets");
        let s = template.sheet_size();
        let mut boundary_rank = vec![u32::MAX; s];
        let mut detector_rank = vec![u32::MAX; s];
        let mut order: Vec<usize> = (0..s).collect();
        order.sort_by_key(|&j| (template.nodes[j].x, template.nodes[j].y));
        let (mut nb, mut nd) = (0u32, 0u32);
        for j in order {
            if template.nodes[j].is_detector() {
                detector_rank[j] = nd;
                nd += 1;
            } else {
                boundary_rank[j] = nb;
                nb += 1;
            }
        }
        let intra: Vec<usize> = template.intra_edges().map(|(i, _)| i).collect();
        let up: Vec<usize> = template.up_edges().map(|(i, _)| i).collect();
        let mut geometry = WindowGeometry {
            template,
            height,
            sheet_size: s,
            boundary_rank,
            detector_rank,
            boundaries_per_sheet: nb,
            detectors_per_sheet: nd,
            edges: Vec::new(),
            neighbors: vec![Vec::new(); s * height],
            toward: vec![[None; 13]; s * height],
            intra_per_row: intra.len(),
            up_per_row: up.len(),
        };
        let mut edges = Vec::with_capacity(height * intra.len() + (height - 1) * up.len());
        for row in 0..height {
            for &k in &intra {
                let e = geometry.template.edges[k];
                edges.push((row * s + e.a, row * s + e.b, row, k, e.direction));
            }
        }
        for row in 0..height - 1 {
            for &k in &up {
                let e = geometry.template.edges[k];
                edges.push((row * s + e.a, (row + 1) * s + e.b, row, k, e.direction));
            }
        }
        for (index, (a, b, row, k, dir)) in edges.into_iter().enumerate() {
            let owner = if geometry.id(a) < geometry.id(b) { a } else { b };
            geometry.edges.push(WindowEdge {
                a: a as u32,
                b: b as u32,
                row: row as u32,
                template_edge: k as u32,
                owner: owner as u32,
            });
            geometry.neighbors[a].push(Neighbor { node: b as u32, edge: index as u32, direction: dir });
            geometry.neighbors[b].push(Neighbor {
                node: a as u32,
                edge: index as u32,
                direction: dir.opposite(),
            });
            geometry.toward[a][dir.index()] = Some((b as u32, index as u32));
            geometry.toward[b][dir.opposite().index()] = Some((a as u32, index as u32));
        }
        for v in 0..geometry.neighbors.len() {
            let mut list = std::mem::take(&mut geometry.neighbors[v]);
            list.sort_by_key(|n| geometry.id(n.node as usize));
            geometry.neighbors[v] = list;
        }
        Arc::new(geometry)
    }

    pub fn node_count(&self) -> usize {
        self.sheet_size * self.height
    }

    pub fn row(&self, v: usize) -> usize {
        v / self.sheet_size
    }

    pub fn column(&self, v: usize) -> usize {
        v % self.sheet_size
    }

    pub fn is_detector(&self, v: usize) -> bool {
        self.template.nodes[self.column(v)].is_detector()
    }

    /// Descriptor with `t` = row within the window.
    pub fn descriptor(&self, v: usize) -> NodeDescriptor {
        self.template.node_at(self.column(v), self.row(v) as i64)
    }

    fn rows_reserved(&self) -> u32 {
        // window rows plus two virtual rows below the bottom sheet
        self.height as u32 + 2
    }

    fn detector_base(&self) -> u32 {
        self.rows_reserved() * self.boundaries_per_sheet
    }

    /// Cluster-ID value of node `v`. Boundary nodes come first, then higher
    /// rows, then `(x, y)`.
    pub fn id(&self, v: usize) -> Cid {
        let from_top = (self.height - 1 - self.row(v)) as u32;
        let j = self.column(v);
        if self.is_detector(v) {
            Cid(self.detector_base() + from_top * self.detectors_per_sheet + self.detector_rank[j])
        } else {
            Cid(from_top * self.boundaries_per_sheet + self.boundary_rank[j])
        }
    }

    /// ID of the node directly below the node with ID `cid` (which may itself
    /// lie just below the window). Saturates at the last virtual row.
    pub fn id_below(&self, cid: Cid) -> Cid {
        if cid.is_reset() {
            return cid;
        }
        let base = self.detector_base();
        let last_row = self.rows_reserved() - 1;
        if cid.0 < base {
            let nb = self.boundaries_per_sheet;
            let (row, j) = (cid.0 / nb, cid.0 % nb);
            Cid((row + 1).min(last_row) * nb + j)
        } else {
            let nd = self.detectors_per_sheet;
            let (row, j) = ((cid.0 - base) / nd, (cid.0 - base) % nd);
            Cid(base + (row + 1).min(last_row) * nd + j)
        }
    }

    /// Dense ID: the rank of `v` among the window's nodes in ID order.
    pub fn dense_id(&self, v: usize) -> u32 {
        self.dense_from_cid(self.id(v)).expect("window node")
    }

    /// Dense ID of the window node a cluster ID names, if it lies in the window.
    pub fn dense_from_cid(&self, cid: Cid) -> Option<u32> {
        let base = self.detector_base();
        let h = self.height as u32;
        let nb = self.boundaries_per_sheet;
        let nd = self.detectors_per_sheet;
        if cid.is_reset() {
            None
        } else if cid.0 < base {
            (cid.0 < h * nb).then_some(cid.0)
        } else {
            let rel = cid.0 - base;
            (rel < h * nd).then_some(h * nb + rel)
        }
    }

    /// Window node with cluster ID `cid`, if any.
    pub fn node_with_id(&self, cid: Cid) -> Option<usize> {
        let base = self.detector_base();
        let (from_top, rank, detector) = if cid.is_reset() {
            return None;
        } else if cid.0 < base {
            (cid.0 / self.boundaries_per_sheet, cid.0 % self.boundaries_per_sheet, false)
        } else {
            let rel = cid.0 - base;
            (rel / self.detectors_per_sheet, rel % self.detectors_per_sheet, true)
        };
        if from_top as usize >= self.height {
            return None;
        }
        let row = self.height - 1 - from_top as usize;
        let ranks = if detector { &self.detector_rank } else { &self.boundary_rank };
        let j = ranks.iter().position(|&r| r == rank)?;
        Some(row * self.sheet_size + j)
    }

    /// Whether `cid` names a boundary node (in or below the window).
    pub fn cid_is_boundary(&self, cid: Cid) -> bool {
        !cid.is_reset() && cid.0 < self.detector_base()
    }

    /// Neighbor and connecting edge in direction `dir`.
    pub fn toward(&self, v: usize, dir: Direction) -> Option<(usize, usize)> {
        self.toward[v][dir.index()].map(|(n, e)| (n as usize, e as usize))
    }

    /// Window node `row * sheet_size + j` for template node `j`.
    pub fn node(&self, row: usize, j: usize) -> usize {
        row * self.sheet_size + j
    }

    /// Window edge index of template edge `k` whose lower endpoint sits in `row`.
    pub fn edge_index(&self, row: usize, k: usize) -> Option<usize> {
        let e = &self.template.edges[k];
        let pos = if e.dt == 0 {
            self.template.intra_edges().position(|(i, _)| i == k)?
        } else {
            self.template.up_edges().position(|(i, _)| i == k)?
        };
        if e.dt == 0 {
            (row < self.height).then(|| row * self.intra_per_row + pos)
        } else {
            (row + 1 < self.height)
                .then(|| self.height * self.intra_per_row + row * self.up_per_row + pos)
        }
    }

    /// Window edge that the edge `e` occupies after a drop, or `None` if it
    /// leaves through the bottom.
    pub fn edge_after_drop(&self, e: usize) -> Option<usize> {
        let intra_total = self.height * self.intra_per_row;
        if e < intra_total {
            (e >= self.intra_per_row).then(|| e - self.intra_per_row)
        } else {
            (e - intra_total >= self.up_per_row).then(|| e - self.up_per_row)
        }
    }

    /// Edges leaving the window at the next drop: the bottom layer.
    pub fn is_commit_edge(&self, e: usize) -> bool {
        self.edges[e].row == 0
    }
}
