//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use snowflake_core::accounting::ResidualHistory;
use snowflake_core::baseline::{uf_decode, BatchWindow};
use snowflake_core::graph::{build_template, Direction, EdgeRef, Family, LayerTemplate};
use snowflake_core::snowflake::Window;

/// Breadth-first distances from every node in `sources`.
pub fn bfs(window: &BatchWindow, sources: &[usize]) -> Vec<usize> {
    let mut dist = vec![usize::MAX; window.node_count()];
    let mut queue = VecDeque::new();
    for &s in sources {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        for (u, _) in window.neighbors(v) {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Minimum weight of any edge set whose boundary on detectors is exactly
/// `{a, b}`: either a path from `a` to `b`, or a path from each to some
/// boundary node.
pub fn min_weight_pair(window: &BatchWindow, a: usize, b: usize) -> usize {
    let boundaries: Vec<usize> = (0..window.node_count()).filter(|&v| window.is_boundary(v)).collect();
    let from_boundary = bfs(window, &boundaries);
    let from_a = bfs(window, &[a]);
    from_a[b].min(from_boundary[a].saturating_add(from_boundary[b]))
}

/// Exhaustive minimum over every edge subset, for tiny windows only.
pub fn exhaustive_min_weight(window: &BatchWindow) -> Option<usize> {
    let m = window.edge_count();
    assert!(m <= 22, "exhaustive search over {m} edges");
    let target = window.syndrome.clone();
    (0u32..1 << m)
        .filter(|mask| {
            let set: Vec<usize> = (0..m).filter(|&e| mask >> e & 1 == 1).collect();
            let mut parity = vec![false; window.node_count()];
            for &e in &set {
                let (x, y) = window.endpoints(e);
                parity[x] ^= true;
                parity[y] ^= true;
            }
            (0..window.node_count()).all(|v| window.is_boundary(v) || parity[v] == target[v])
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
}

pub struct RandomInstance {
    pub template: LayerTemplate,
    pub window: BatchWindow,
    pub errors: Vec<usize>,
}

/// Random repetition-code window with `d <= 5`, at most 10 sheets and i.i.d.
/// edge flips; no temporal boundary, so every window edge is a real edge.
pub fn random_instance(rng: &mut ChaCha8Rng) -> RandomInstance {
    let d = rng.gen_range(2..=5);
    let sheets = rng.gen_range(1..=10);
    let p = rng.gen_range(0.02..0.3);
    let template = build_template(Family::RepetitionPhenomenological, d).unwrap();
    let mut window = BatchWindow::new(&template, 0, sheets, false);
    let errors: Vec<usize> = (0..window.edge_count()).filter(|_| rng.gen::<f64>() < p).collect();
    let syndrome = window.residual_syndrome(&errors);
    for (v, &bit) in syndrome.iter().enumerate() {
        window.set_defect(v, bit);
    }
    RandomInstance { template, window, errors }
}

/// Random window holding exactly two defects.
pub fn random_pair(rng: &mut ChaCha8Rng) -> (BatchWindow, usize, usize) {
    let d = rng.gen_range(2..=5);
    // a single d = 2 sheet holds only one detector
    let sheets = rng.gen_range(if d == 2 { 2 } else { 1 }..=10);
    let template = build_template(Family::RepetitionPhenomenological, d).unwrap();
    let mut window = BatchWindow::new(&template, 0, sheets, false);
    let detectors: Vec<usize> = (0..window.node_count()).filter(|&v| !window.is_boundary(v)).collect();
    loop {
        let a = detectors[rng.gen_range(0..detectors.len())];
        let b = detectors[rng.gen_range(0..detectors.len())];
        if a != b {
            window.set_defect(a, true);
            window.set_defect(b, true);
            return (window, a.min(b), a.max(b));
        }
    }
}

/// Residual of UF decoding on `instance`, as absolute edges.
pub fn residual(instance: &RandomInstance) -> ResidualHistory {
    let correction = uf_decode(&instance.window);
    let mut r = ResidualHistory::new();
    let refs = |e: &usize| -> EdgeRef { instance.window.edge_ref(*e).expect("no temporal edges") };
    r.toggle_all(instance.errors.iter().map(refs));
    r.toggle_all(correction.iter().map(refs));
    r.finalize_before(instance.window.sheets as i64);
    r
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Hand-derived traces of two small repetition-code scenarios.
//
// Window: d = 3, three sheets. Node `v = row * 4 + j` with `j` = W, x=1, x=2,
// E. Dense IDs, bottom row W=4 10 11 E=5, middle W=2 8 9 E=3, top W=0 6 7
// E=1. Trace coordinates are `(x, y, row)`. Both scenarios start after one
// empty cycle (timesteps 1 to 3); the expected lines cover grow onwards.

fn primed_window() -> Window {
    let mut w = Window::new(build_template(Family::RepetitionPhenomenological, 3).unwrap());
    w.run_decoding_cycle(&[false; 4]).unwrap();
    w
}

/// A half-grown active cluster with one defect (x=1, middle row) and a lone
/// defect (x=2, top row); the next round adds a defect at x=1. After the drop
/// the cluster touches the west boundary; its defect is pushed there and
/// absorbed, and the middle node joins through a downward pointer.
pub fn boundary_absorption_window() -> Window {
    let mut w = primed_window();
    let g = w.geometry().clone();
    for k in [0, 1, 3] {
        w.edge_mut(g.edge_index(1, k).unwrap()).growth = 1;
    }
    for v in [5, 10] {
        let n = w.node_mut(v);
        n.active = true;
        n.defect = true;
    }
    w
}

pub const BOUNDARY_ABSORPTION_ROUND: [bool; 4] = [false, true, false, false];

pub const BOUNDARY_ABSORPTION_TRACE: &[&str] = &[
        // grow: the cluster's three half edges become full
        "5 (0,0,0) growth.E 1/2->1",
        "5 (1,0,0) growth.E 1/2->1",
        "5 (1,0,1) growth.E 0->1/2",
        "5 (3,0,1) growth.W 0->1/2",
        "5 (1,0,1) growth.D 1/2->1",
        "5 (2,0,1) growth.D 0->1/2",
        "5 (2,0,2) growth.D 0->1/2",
        // merging
        "6 (1,0,0) cid 10->4",
        "6 (1,0,0) pointer C->W",
        "6 (1,0,0) busy false->true",
        "6 (2,0,0) cid 11->10",
        "6 (2,0,0) pointer C->W",
        "6 (2,0,0) busy false->true",
        "6 (1,0,2) active false->true",
        "6 (1,0,2) busy false->true",
        "7 (1,0,0) active true->false",
        "7 (1,0,0) defect true->false",
        "7 (2,0,0) active false->true",
        "7 (2,0,0) cid 10->4",
        "7 (1,0,1) cid 8->4",
        "7 (1,0,1) pointer C->D",
        "7 (1,0,1) busy false->true",
        "7 (1,0,2) busy true->false",
        "7 (0,0,0) correction.E false->true",
        "8 (1,0,0) busy true->false",
        "8 (2,0,0) active true->false",
        "8 (1,0,1) busy true->false",
        "9 (2,0,0) busy true->false",
    ];

/// A five-node cluster rooted at the middle-row west boundary whose pointer
/// tree runs through the bottom row. After the drop the east detector's
/// downward pointer leaves the window, it resets, and unrooting rebuilds the
/// tree: the east detector finishes unrooting first, then x=1, then the
/// boundary, before the CIDs flood back.
pub fn unrooting_window() -> Window {
    let mut w = primed_window();
    let g = w.geometry().clone();
    for (row, k) in [(1, 0), (1, 1), (0, 4), (0, 1), (0, 3)] {
        w.edge_mut(g.edge_index(row, k).unwrap()).growth = 2;
    }
    let root = g.id(4);
    for (v, dir) in [(4, Direction::C), (5, Direction::W), (6, Direction::D), (2, Direction::W), (1, Direction::U)] {
        let n = w.node_mut(v);
        n.cid = root;
        n.pointer = dir;
    }
    w
}

pub const UNROOTING_TRACE: &[&str] = &[
        "5 (2,0,0) cid 4->R",
        "5 (2,0,0) pointer D->C",
        "6 (1,0,0) cid 4->R",
        "6 (1,0,0) pointer W->C",
        "6 (1,0,0) busy false->true",
        "6 (2,0,0) cid R->11",
        "6 (2,0,0) unrooted false->true",
        "6 (2,0,0) busy false->true",
        "7 (0,0,0) cid 4->R",
        "7 (0,0,0) busy false->true",
        "7 (1,0,0) cid R->10",
        "7 (1,0,0) unrooted false->true",
        "7 (2,0,0) busy true->false",
        "8 (0,0,0) cid R->4",
        "8 (0,0,0) unrooted false->true",
        "8 (1,0,0) busy true->false",
        "8 (2,0,0) cid 11->10",
        "8 (2,0,0) pointer C->W",
        "8 (2,0,0) busy false->true",
        "9 (0,0,0) busy true->false",
        "9 (1,0,0) cid 10->4",
        "9 (1,0,0) pointer C->W",
        "9 (1,0,0) busy false->true",
        "9 (2,0,0) busy true->false",
        "10 (1,0,0) busy true->false",
        "10 (2,0,0) cid 10->4",
        "10 (2,0,0) busy false->true",
        "11 (2,0,0) busy true->false",
    ];

/// Run one traced cycle and return the trace lines from grow onwards with the
/// cycle's total and merging timesteps.
pub fn traced_cycle(w: &mut Window, round: &[bool]) -> (Vec<String>, u64, u64) {
    w.enable_trace();
    let out = w.run_decoding_cycle(round).unwrap();
    let lines = w.take_trace().into_iter().filter(|e| e.timestep >= 5).map(|e| e.to_string()).collect();
    (lines, out.timesteps, out.merging_timesteps)
}
