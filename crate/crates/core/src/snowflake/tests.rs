use super::*;
use crate::graph::{build_template, Family};

// Repetition code, d = 3, three sheets. Template nodes: 0 = W, 1, 2 = detectors,
// 3 = E. Template edges: 0..3 intra (eastward), 3, 4 up at x = 1, 2.
fn window() -> Window {
    Window::new(build_template(Family::RepetitionPhenomenological, 3).unwrap())
}

fn edge(w: &Window, row: usize, k: usize) -> usize {
    w.geometry().edge_index(row, k).unwrap()
}

fn make_root(w: &mut Window, v: usize) {
    let id = w.geometry().id(v);
    let n = w.node_mut(v);
    n.cid = id;
    n.pointer = Direction::C;
}

fn attach(w: &mut Window, v: usize, root: usize, pointer: Direction) {
    let id = w.geometry().id(root);
    let n = w.node_mut(v);
    n.cid = id;
    n.pointer = pointer;
}

#[test]
fn controller_waits_two_timesteps_after_drop() {
    let mut c = Controller::default();
    assert_eq!(c.tick(false), ControllerAction::BroadcastDrop);
    assert_eq!(c.wait, 2);
    assert_eq!(c.tick(false), ControllerAction::Idle);
    assert_eq!(c.tick(true), ControllerAction::Idle);
    assert_eq!(c.tick(true), ControllerAction::Idle);
    assert_eq!(c.tick(true), ControllerAction::Idle);
    assert_eq!(c.tick(false), ControllerAction::BroadcastDrop);
}

#[test]
fn buffer_height() {
    assert_eq!(min_buffer_height(3), 2);
    assert_eq!(min_buffer_height(4), 4);
    assert_eq!(window_height(5), 5);
    assert_eq!(window_height(2), 3);
    let t = build_template(Family::RepetitionPhenomenological, 3).unwrap();
    assert!(matches!(Window::with_height(t, 1), Err(SnowflakeError::WindowTooSmall { height: 1 })));
}

#[test]
fn empty_window_cycle_is_three_timesteps() {
    let mut w = window();
    assert_eq!(w.tick(), Stage::Drop);
    assert!(w.nodes().iter().all(|n| n.stage == Stage::Grow));
    let mut w = window();
    for _ in 0..5 {
        let out = w.run_decoding_cycle(&[false; 4]).unwrap();
        assert_eq!((out.timesteps, out.merging_timesteps), (3, 1));
        assert!(out.committed.is_empty());
    }
    assert_eq!(w.timestep(), 15);
    assert_eq!(w.top_sheet(), 4);
    assert_eq!(w.stats().cycles, 5);
}

#[test]
fn stage_sequence() {
    let mut w = window();
    let stages: Vec<Stage> = (0..3).map(|_| w.tick()).collect();
    assert_eq!(stages, vec![Stage::Drop, Stage::Grow, Stage::Merging]);
    w.drop_stage();
    assert!(w.nodes().iter().all(|n| n.stage == Stage::Grow));
    w.grow_stage();
    assert!(w.nodes().iter().all(|n| n.stage == Stage::Merging));
}

#[test]
fn sheet_size_checked() {
    let mut w = window();
    assert!(matches!(
        w.run_decoding_cycle(&[false; 3]),
        Err(SnowflakeError::SheetSizeMismatch { got: 3, expected: 4 })
    ));
}

#[test]
fn single_active_node_grows_half_edges() {
    let mut w = window();
    w.node_mut(5).active = true;
    w.grow_stage();
    let half: Vec<usize> = (0..w.edges().len()).filter(|&e| w.edges()[e].growth == 1).collect();
    let mut expected = vec![edge(&w, 1, 0), edge(&w, 1, 1), edge(&w, 0, 3), edge(&w, 1, 3)];
    expected.sort_unstable();
    assert_eq!(half, expected);
    assert!(w.edges().iter().all(|e| e.growth <= 1));
    w.grow_stage();
    assert!(w.edges()[edge(&w, 1, 0)].is_full());
    w.grow_stage();
    assert_eq!(w.edges()[edge(&w, 1, 0)].growth, EdgeState::FULL);
}

#[test]
fn two_active_endpoints_fill_an_edge_at_once() {
    let mut w = window();
    w.node_mut(5).active = true;
    w.node_mut(6).active = true;
    w.grow_stage();
    assert!(w.edges()[edge(&w, 1, 1)].is_full());
    assert_eq!(w.edges()[edge(&w, 1, 0)].growth, 1);
}

#[test]
fn downward_pointer_in_bottom_row_resets() {
    let mut w = window();
    attach(&mut w, 1, 0, Direction::W);
    w.node_mut(2).pointer = Direction::D;
    w.node_mut(6).pointer = Direction::D;
    w.grow_stage();
    assert!(w.nodes()[2].cid.is_reset());
    assert_eq!(w.nodes()[2].pointer, Direction::C);
    assert!(!w.nodes()[1].cid.is_reset());
    // only the bottom row is affected
    assert_eq!(w.nodes()[6].pointer, Direction::D);
}

#[test]
fn syncing_pushes_defect_to_root() {
    let mut w = window();
    let e = edge(&w, 1, 1);
    w.edge_mut(e).growth = 2;
    make_root(&mut w, 5);
    attach(&mut w, 6, 5, Direction::W);
    w.node_mut(6).defect = true;
    w.merging_stage();
    assert!(!w.nodes()[6].defect);
    assert!(w.nodes()[5].defect);
    assert!(w.edges()[e].correction);
    assert!(w.nodes()[6].busy);
    // the root learns its activity from its own defect bit next timestep
    assert!(!w.nodes()[5].active);
    w.merging_stage();
    assert!(w.nodes()[5].active);
    w.merging_stage();
    assert!(w.nodes()[6].active);
    w.merging_stage();
    assert!(!w.any_busy());
}

#[test]
fn two_defects_annihilate_at_root() {
    let mut w = window();
    let e = edge(&w, 1, 1);
    w.edge_mut(e).growth = 2;
    make_root(&mut w, 5);
    attach(&mut w, 6, 5, Direction::W);
    w.node_mut(5).defect = true;
    w.node_mut(6).defect = true;
    w.merging_stage();
    assert_eq!(w.defect_count(), 0);
    assert!(w.edges()[e].correction);
}

#[test]
fn boundary_root_absorbs() {
    let mut w = window();
    let e = edge(&w, 1, 0);
    w.edge_mut(e).growth = 2;
    attach(&mut w, 5, 4, Direction::W);
    w.node_mut(5).defect = true;
    w.node_mut(5).active = true;
    w.merging_stage();
    assert_eq!(w.defect_count(), 0);
    assert!(w.edges()[e].correction);
    assert!(!w.nodes()[4].active);
    assert!(!w.nodes()[5].active);
}

#[test]
fn flooding_adopts_lower_cid_with_pointer() {
    let mut w = window();
    w.edge_mut(edge(&w, 1, 1)).growth = 2;
    w.edge_mut(edge(&w, 1, 2)).growth = 2;
    w.merging_stage();
    // boundary IDs sort below detector IDs
    assert_eq!(w.nodes()[6].cid, w.geometry().id(7));
    assert_eq!(w.nodes()[6].pointer, Direction::E);
    assert_eq!(w.nodes()[5].cid, w.geometry().id(5));
    w.merging_stage();
    assert_eq!(w.nodes()[5].cid, w.geometry().id(7));
    assert_eq!(w.nodes()[5].pointer, Direction::E);
    w.merging_stage();
    assert!(!w.any_busy());
    assert!(invariants::check_quiescent(&w).is_empty());
}

#[test]
fn reset_neighbor_starts_unrooting_once() {
    let mut w = window();
    w.edge_mut(edge(&w, 0, 1)).growth = 2;
    w.node_mut(1).cid = Cid::RESET;
    attach(&mut w, 2, 1, Direction::W);
    w.merging_stage();
    assert_eq!(w.nodes()[1].cid, w.geometry().id(1));
    assert!(w.nodes()[1].unrooted);
    assert!(w.nodes()[2].cid.is_reset());
    w.merging_stage();
    assert!(w.nodes()[2].unrooted);
    assert_eq!(w.nodes()[2].cid, w.geometry().id(2));
    // 1 is unrooted and ignores its reset neighbor; it adopts nothing lower
    assert_eq!(w.nodes()[1].cid, w.geometry().id(1));
    w.merging_stage();
    assert_eq!(w.nodes()[2].cid, w.geometry().id(1));
}

#[test]
fn drop_commits_bottom_row_and_shifts() {
    let mut w = window();
    w.run_decoding_cycle(&[false; 4]).unwrap();
    let bottom = edge(&w, 0, 1);
    let middle = edge(&w, 1, 1);
    w.edge_mut(bottom).correction = true;
    w.edge_mut(middle).correction = true;
    w.node_mut(5).defect = true;
    let sheet = w.sheet_of_row(1);
    w.drop_stage();
    assert_eq!(w.take_committed(), vec![EdgeRef::new(sheet - 1, 1)]);
    assert!(w.nodes()[1].defect);
    assert!(w.edges()[bottom].correction);
    assert!(!w.edges()[middle].correction);
    assert_eq!(w.nodes()[1].cid, w.geometry().id_below(w.geometry().id(5)));
    assert_eq!(w.nodes()[1].cid, w.geometry().id(1));
    assert_eq!(w.tentative_correction(), vec![EdgeRef::new(sheet, 1)]);
}

#[test]
fn commit_region_defect_is_counted() {
    let mut w = window();
    w.node_mut(1).defect = true;
    w.drop_stage();
    assert_eq!(w.stats().commit_region_defects, 1);
}

#[test]
fn trace_lines() {
    let mut w = window();
    w.enable_trace();
    w.run_decoding_cycle(&[false, true, false, false]).unwrap();
    let trace = w.take_trace();
    assert!(!trace.is_empty());
    let first = trace[0].to_string();
    assert!(first.starts_with("1 "), "{first}");
    assert!(trace.iter().any(|e| e.variable == "defect" && e.new == "true" && e.row == 2));
    // the new defect only activates during merging, so growth starts next cycle
    assert!(!trace.iter().any(|e| e.variable.starts_with("growth.")));
    w.run_decoding_cycle(&[false; 4]).unwrap();
    let trace = w.take_trace();
    assert!(trace.iter().any(|e| e.variable.starts_with("growth.") && e.new == "1/2"));
}
