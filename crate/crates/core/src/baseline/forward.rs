//! Forward windowing: decode `c + b` sheets, commit the bottom `c` layers,
//! raise the window by `c` and repeat.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::uf::{uf_decode, BatchWindow};
use crate::graph::{EdgeRef, LayerTemplate, NodeRef};

#[derive(Debug, Clone)]
pub struct ForwardUf {
    template: Arc<LayerTemplate>,
    commit: usize,
    buffer: usize,
    /// Raw measurement-difference bits per sheet not yet below the window.
    raw: BTreeMap<i64, Vec<bool>>,
    /// Parity of committed corrections at each node near the window bottom.
    committed_parity: HashMap<NodeRef, bool>,
    bottom: i64,
    next_sheet: i64,
}

impl ForwardUf {
    /// The common choice `c = b = d`.
    pub fn new(template: Arc<LayerTemplate>) -> Self {
        let d = template.distance;
        Self::with_regions(template, d, d)
    }

    pub fn with_regions(template: Arc<LayerTemplate>, commit: usize, buffer: usize) -> Self {
        assert!(commit >= 1, "commit region needs at least one layer");
        ForwardUf {
            template,
            commit,
            buffer,
            raw: BTreeMap::new(),
            committed_parity: HashMap::new(),
            bottom: 0,
            next_sheet: 0,
        }
    }

    pub fn window_bottom(&self) -> i64 {
        self.bottom
    }

    /// Record one measurement sheet and run every forward step it enables.
    pub fn push_sheet(&mut self, top_defects: &[bool]) -> Vec<EdgeRef> {
        self.raw.insert(self.next_sheet, top_defects.to_vec());
        self.next_sheet += 1;
        let mut out = Vec::new();
        while self.next_sheet - self.bottom >= (self.commit + self.buffer) as i64 {
            out.extend(self.forward_step());
        }
        out
    }

    /// Window over `sheets` sheets from the current bottom, with syndrome
    /// including the artificial defects left by earlier commits.
    pub fn current_window(&self, sheets: usize, temporal_boundary: bool) -> BatchWindow {
        let mut w = BatchWindow::new(&self.template, self.bottom, sheets, temporal_boundary);
        for row in 0..sheets {
            let sheet = self.bottom + row as i64;
            let raw = self.raw.get(&sheet);
            for j in 0..self.template.sheet_size() {
                let node = NodeRef::new(sheet, j);
                let bit = raw.is_some_and(|r| r[j])
                    ^ self.committed_parity.get(&node).copied().unwrap_or(false);
                let v = w.node_index(node).expect("inside window");
                w.set_defect(v, bit);
            }
        }
        w
    }

    /// Decode the full window, commit the bottom `c` layers, raise by `c`.
    pub fn forward_step(&mut self) -> Vec<EdgeRef> {
        let w = self.current_window(self.commit + self.buffer, true);
        let correction = uf_decode(&w);
        let cut = self.bottom + self.commit as i64;
        let committed: Vec<EdgeRef> = correction
            .into_iter()
            .filter_map(|e| w.edge_ref(e))
            .filter(|e| e.layer < cut)
            .collect();
        self.apply(&committed);
        self.bottom = cut;
        self.prune();
        committed
    }

    /// Decode whatever remains with no temporal boundary and commit all of it.
    pub fn finish(&mut self) -> Vec<EdgeRef> {
        let sheets = (self.next_sheet - self.bottom).max(0) as usize;
        if sheets == 0 {
            return Vec::new();
        }
        let w = self.current_window(sheets, false);
        let committed: Vec<EdgeRef> = uf_decode(&w).into_iter().filter_map(|e| w.edge_ref(e)).collect();
        self.apply(&committed);
        self.bottom = self.next_sheet;
        self.prune();
        committed
    }

    fn apply(&mut self, committed: &[EdgeRef]) {
        for &e in committed {
            let (a, b) = self.template.endpoints(e);
            for n in [a, b] {
                *self.committed_parity.entry(n).or_default() ^= true;
            }
        }
    }

    fn prune(&mut self) {
        let bottom = self.bottom;
        self.raw = self.raw.split_off(&bottom);
        self.committed_parity.retain(|n, _| n.sheet >= bottom);
    }
}
