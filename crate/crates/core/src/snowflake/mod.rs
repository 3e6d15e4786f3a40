//! Lockstep emulation of the Snowflake decoder: one controller and one
//! automaton per window node, all advancing in discrete timesteps.
//!
//! Every timestep reads the start-of-timestep state of the whole window and
//! writes a fresh next state, so the result never depends on node update
//! order. Each decoding cycle is `drop`, `grow`, then `merging` timesteps
//! until no node reports busy.

mod geometry;
pub mod invariants;

use std::fmt;
use std::sync::Arc;

pub use geometry::{Cid, Neighbor, WindowEdge, WindowGeometry};

use crate::error::SnowflakeError;
use crate::graph::{Direction, EdgeRef, LayerTemplate};

/// Minimum buffer height `2 * floor(d / 2)`.
pub fn min_buffer_height(d: usize) -> usize {
    2 * (d / 2)
}

/// Window height in sheets with one commit layer and the minimum buffer.
pub fn window_height(d: usize) -> usize {
    1 + min_buffer_height(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Drop,
    Grow,
    Merging,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeState {
    pub active: bool,
    pub cid: Cid,
    pub defect: bool,
    pub pointer: Direction,
    pub unrooted: bool,
    pub busy: bool,
    pub stage: Stage,
}

/// Edge variables. `growth` counts half edges: 0, 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EdgeState {
    pub growth: u8,
    pub correction: bool,
}

impl EdgeState {
    pub const FULL: u8 = 2;

    pub fn is_full(&self) -> bool {
        self.growth >= Self::FULL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerAction {
    BroadcastDrop,
    Idle,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Controller {
    pub wait: u8,
}

impl Controller {
    /// One controller timestep given whether any node reported busy.
    pub fn tick(&mut self, any_busy: bool) -> ControllerAction {
        if self.wait > 0 {
            self.wait -= 1;
            ControllerAction::Idle
        } else if any_busy {
            ControllerAction::Idle
        } else {
            self.wait = 2;
            ControllerAction::BroadcastDrop
        }
    }
}

/// One changed variable in one timestep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub timestep: u64,
    pub x: i32,
    pub y: i32,
    pub row: usize,
    pub variable: String,
    pub old: String,
    pub new: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({},{},{}) {} {}->{}",
            self.timestep, self.x, self.y, self.row, self.variable, self.old, self.new
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WindowStats {
    /// Defects found in the bottom sheet when a drop executed.
    pub commit_region_defects: u64,
    /// Drops that found a top-sheet node outside its own singleton cluster.
    pub top_sheet_anomalies: u64,
    pub cycles: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleOutcome {
    /// Corrections committed by this cycle's drop.
    pub committed: Vec<EdgeRef>,
    /// Timesteps spent: drop, grow and all merging timesteps.
    pub timesteps: u64,
    pub merging_timesteps: u64,
}

/// Full state of the viewing window plus the controller.
#[derive(Debug, Clone)]
pub struct Window {
    geometry: Arc<WindowGeometry>,
    nodes: Vec<NodeState>,
    edges: Vec<EdgeState>,
    controller: Controller,
    timestep: u64,
    top_sheet: i64,
    pending: Vec<bool>,
    committed: Vec<EdgeRef>,
    merging_cap: u64,
    trace: Option<Vec<TraceEvent>>,
    stats: WindowStats,
}

impl Window {
    /// Window with one commit layer and the minimum buffer for the template's
    /// distance.
    pub fn new(template: LayerTemplate) -> Self {
        let h = window_height(template.distance);
        Self::with_height(template, h).expect("minimum window is at least two sheets")
    }

    /// Window with an explicit sheet count.
    pub fn with_height(template: LayerTemplate, height: usize) -> Result<Self, SnowflakeError> {
        if height < 2 {
            return Err(SnowflakeError::WindowTooSmall { height });
        }
        Ok(Self::from_geometry(WindowGeometry::new(template, height)))
    }

    pub fn from_geometry(geometry: Arc<WindowGeometry>) -> Self {
        let nodes = (0..geometry.node_count())
            .map(|v| NodeState {
                active: false,
                cid: geometry.id(v),
                defect: false,
                pointer: Direction::C,
                unrooted: false,
                busy: false,
                stage: Stage::Merging,
            })
            .collect();
        let merging_cap = 10 * geometry.node_count() as u64;
        let top_sheet = -1;
        Window {
            nodes,
            edges: vec![EdgeState::default(); geometry.edges.len()],
            pending: vec![false; geometry.sheet_size],
            geometry,
            controller: Controller::default(),
            timestep: 0,
            top_sheet,
            committed: Vec::new(),
            merging_cap,
            trace: None,
            stats: WindowStats::default(),
        }
    }

    pub fn set_merging_cap(&mut self, cap: u64) {
        self.merging_cap = cap;
    }

    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn geometry(&self) -> &Arc<WindowGeometry> {
        &self.geometry
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeState] {
        &self.edges
    }

    pub fn node_mut(&mut self, v: usize) -> &mut NodeState {
        &mut self.nodes[v]
    }

    pub fn edge_mut(&mut self, e: usize) -> &mut EdgeState {
        &mut self.edges[e]
    }

    pub fn controller(&self) -> Controller {
        self.controller
    }

    pub fn timestep(&self) -> u64 {
        self.timestep
    }

    pub fn stats(&self) -> WindowStats {
        self.stats
    }

    /// Absolute sheet index of the window's top row.
    pub fn top_sheet(&self) -> i64 {
        self.top_sheet
    }

    /// Absolute sheet index of window row `row`.
    pub fn sheet_of_row(&self, row: usize) -> i64 {
        self.top_sheet - (self.geometry.height - 1 - row) as i64
    }

    /// Absolute identity of window edge `e`.
    pub fn edge_ref(&self, e: usize) -> EdgeRef {
        let edge = &self.geometry.edges[e];
        EdgeRef::new(self.sheet_of_row(edge.row as usize), edge.template_edge as usize)
    }

    pub fn any_busy(&self) -> bool {
        self.nodes.iter().any(|n| n.busy)
    }

    pub fn defect_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.defect).count()
    }

    /// Set the measurement bits the next drop will load into the top sheet.
    pub fn set_pending(&mut self, top_defects: &[bool]) -> Result<(), SnowflakeError> {
        if top_defects.len() != self.geometry.sheet_size {
            return Err(SnowflakeError::SheetSizeMismatch {
                got: top_defects.len(),
                expected: self.geometry.sheet_size,
            });
        }
        self.pending.copy_from_slice(top_defects);
        Ok(())
    }

    /// Corrections committed since the last call.
    pub fn take_committed(&mut self) -> Vec<EdgeRef> {
        std::mem::take(&mut self.committed)
    }

    /// Edges currently in the tentative correction.
    pub fn tentative_correction(&self) -> Vec<EdgeRef> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].correction)
            .map(|e| self.edge_ref(e))
            .collect()
    }

    /// Commit the entire tentative correction and clear it.
    pub fn commit_all(&mut self) -> Vec<EdgeRef> {
        let all = self.tentative_correction();
        for e in &mut self.edges {
            e.correction = false;
        }
        all
    }

    /// One global timestep: controller first, then every node runs its
    /// current stage. Returns the stage the nodes executed.
    pub fn tick(&mut self) -> Stage {
        let before = self.trace.is_some().then(|| (self.nodes.clone(), self.edges.clone()));
        if self.controller.tick(self.any_busy()) == ControllerAction::BroadcastDrop {
            for n in &mut self.nodes {
                n.stage = Stage::Drop;
            }
        }
        let stage = self.nodes[0].stage;
        debug_assert!(self.nodes.iter().all(|n| n.stage == stage));
        match stage {
            Stage::Drop => self.drop_stage(),
            Stage::Grow => self.grow_stage(),
            Stage::Merging => self.merging_stage(),
        }
        self.timestep += 1;
        if let Some((nodes, edges)) = before {
            self.record_trace(&nodes, &edges);
        }
        stage
    }

    /// Ingest one measurement round and run drop, grow and merging until
    /// quiescent.
    pub fn run_decoding_cycle(&mut self, top_defects: &[bool]) -> Result<CycleOutcome, SnowflakeError> {
        self.set_pending(top_defects)?;
        let start = self.timestep;
        let mut merging = 0u64;
        loop {
            let stage = self.tick();
            if stage == Stage::Merging {
                merging += 1;
                if !self.any_busy() {
                    break;
                }
                if merging >= self.merging_cap {
                    return Err(SnowflakeError::MergingCap {
                        cap: self.merging_cap,
                        cycle: self.stats.cycles,
                        busy: self.nodes.iter().filter(|n| n.busy).count(),
                    });
                }
            }
        }
        self.stats.cycles += 1;
        Ok(CycleOutcome {
            committed: self.take_committed(),
            timesteps: self.timestep - start,
            merging_timesteps: merging,
        })
    }

    fn drop_stage(&mut self) {
        let g = Arc::clone(&self.geometry);
        let s = g.sheet_size;
        let h = g.height;
        for (e, state) in self.edges.iter().enumerate() {
            if state.correction && g.is_commit_edge(e) {
                self.committed.push(self.edge_ref(e));
            }
        }
        for j in 0..s {
            if self.nodes[g.node(0, j)].defect {
                self.stats.commit_region_defects += 1;
            }
            let top = g.node(h - 1, j);
            if self.nodes[top].cid != g.id(top) || self.nodes[top].pointer != Direction::C {
                self.stats.top_sheet_anomalies += 1;
            }
        }
        let old = std::mem::take(&mut self.nodes);
        let mut nodes = Vec::with_capacity(old.len());
        for v in 0..old.len() {
            let row = g.row(v);
            let n = if row + 1 < h {
                let above = old[v + s];
                NodeState {
                    cid: g.id_below(above.cid),
                    unrooted: false,
                    busy: old[v].busy,
                    stage: Stage::Grow,
                    ..above
                }
            } else {
                NodeState {
                    active: false,
                    cid: g.id(v),
                    defect: self.pending[g.column(v)] && g.is_detector(v),
                    pointer: Direction::C,
                    unrooted: false,
                    busy: old[v].busy,
                    stage: Stage::Grow,
                }
            };
            nodes.push(n);
        }
        self.nodes = nodes;
        let mut edges = vec![EdgeState::default(); self.edges.len()];
        for (e, state) in self.edges.iter().enumerate() {
            if let Some(to) = g.edge_after_drop(e) {
                edges[to] = *state;
            }
        }
        self.edges = edges;
        self.top_sheet += 1;
        self.pending.iter_mut().for_each(|b| *b = false);
    }

    fn grow_stage(&mut self) {
        let g = Arc::clone(&self.geometry);
        for (state, edge) in self.edges.iter_mut().zip(&g.edges) {
            if state.is_full() {
                continue;
            }
            let pushes = u8::from(self.nodes[edge.a as usize].active)
                + u8::from(self.nodes[edge.b as usize].active);
            state.growth = (state.growth + pushes).min(EdgeState::FULL);
        }
        for j in 0..g.sheet_size {
            let n = &mut self.nodes[g.node(0, j)];
            if n.pointer.has_down() {
                n.cid = Cid::RESET;
                n.pointer = Direction::C;
            }
        }
        for n in &mut self.nodes {
            n.stage = Stage::Merging;
        }
    }

    fn merging_stage(&mut self) {
        let g = Arc::clone(&self.geometry);
        let prev = self.nodes.clone();
        let mut arrivals = vec![false; prev.len()];
        for v in 0..prev.len() {
            let old = prev[v];
            let mut next = old;
            next.busy = false;

            // syncing, on the previous timestep's pointers
            let x = g.is_detector(v) && old.defect;
            if old.pointer == Direction::C {
                next.active = x;
            } else {
                let (u, e) = g
                    .toward(v, old.pointer)
                    .expect("pointer names an edge inside the window");
                next.active = prev[u].active;
                if x {
                    next.busy = true;
                    self.edges[e].correction ^= true;
                    next.defect = false;
                    arrivals[u] ^= true;
                }
            }
            if next.active != old.active {
                next.busy = true;
            }

            // flooding
            if old.cid.is_reset() {
                next.busy = true;
                next.cid = g.id(v);
                next.unrooted = true;
            } else {
                for nb in &g.neighbors[v] {
                    if !self.edges[nb.edge as usize].is_full() {
                        continue;
                    }
                    let seen = prev[nb.node as usize].cid;
                    if seen.is_reset() {
                        if !old.unrooted {
                            next.busy = true;
                            next.cid = Cid::RESET;
                            next.pointer = Direction::C;
                            break;
                        }
                    } else if seen < next.cid {
                        next.busy = true;
                        next.pointer = nb.direction;
                        next.cid = seen;
                    }
                }
            }
            self.nodes[v] = next;
        }
        for (v, arrived) in arrivals.into_iter().enumerate() {
            // boundary nodes absorb
            if arrived && g.is_detector(v) {
                self.nodes[v].defect ^= true;
            }
        }
    }

    fn cid_label(&self, cid: Cid) -> String {
        if cid.is_reset() {
            "R".to_string()
        } else {
            match self.geometry.dense_from_cid(cid) {
                Some(id) => id.to_string(),
                None => format!("below:{}", cid.0),
            }
        }
    }

    fn record_trace(&mut self, old_nodes: &[NodeState], old_edges: &[EdgeState]) {
        let g = Arc::clone(&self.geometry);
        let timestep = self.timestep;
        let mut events = Vec::new();
        let mut push = |v: usize, variable: String, old: String, new: String| {
            let d = g.descriptor(v);
            events.push(TraceEvent { timestep, x: d.x, y: d.y, row: g.row(v), variable, old, new });
        };
        for (v, (a, b)) in old_nodes.iter().zip(&self.nodes).enumerate() {
            if a.active != b.active {
                push(v, "active".into(), a.active.to_string(), b.active.to_string());
            }
            if a.cid != b.cid {
                push(v, "cid".into(), self.cid_label(a.cid), self.cid_label(b.cid));
            }
            if a.defect != b.defect {
                push(v, "defect".into(), a.defect.to_string(), b.defect.to_string());
            }
            if a.pointer != b.pointer {
                push(v, "pointer".into(), a.pointer.to_string(), b.pointer.to_string());
            }
            if a.unrooted != b.unrooted {
                push(v, "unrooted".into(), a.unrooted.to_string(), b.unrooted.to_string());
            }
            if a.busy != b.busy {
                push(v, "busy".into(), a.busy.to_string(), b.busy.to_string());
            }
        }
        for (e, (a, b)) in old_edges.iter().zip(&self.edges).enumerate() {
            let edge = g.edges[e];
            let owner = edge.owner as usize;
            let dir = if owner == edge.a as usize {
                g.template.edges[edge.template_edge as usize].direction
            } else {
                g.template.edges[edge.template_edge as usize].direction.opposite()
            };
            if a.growth != b.growth {
                push(owner, format!("growth.{dir}"), half(a.growth), half(b.growth));
            }
            if a.correction != b.correction {
                push(owner, format!("correction.{dir}"), a.correction.to_string(), b.correction.to_string());
            }
        }
        if let Some(trace) = self.trace.as_mut() {
            trace.extend(events);
        }
    }
}

fn half(growth: u8) -> String {
    match growth {
        0 => "0".into(),
        1 => "1/2".into(),
        _ => "1".into(),
    }
}

#[cfg(test)]
mod tests;
