//! Structural checks on a quiescent window.

use std::fmt;

use super::{Cid, Window};
use crate::graph::Direction;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SplitCid { node: usize, cid: Cid, expected: Cid },
    BrokenPointer { node: usize },
    PointerCycle { node: usize },
    StrayDefect { node: usize },
    WrongActivity { node: usize, expected: bool },
    BoundaryDefect { node: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Connected components over fully grown edges, as lists of window nodes.
pub fn clusters(window: &Window) -> Vec<Vec<usize>> {
    let g = window.geometry();
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut members = Vec::new();
        while let Some(v) = stack.pop() {
            members.push(v);
            for nb in &g.neighbors[v] {
                let u = nb.node as usize;
                if !seen[u] && window.edges()[nb.edge as usize].is_full() {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Check every cluster of a quiescent window: one shared CID equal to the
/// minimum member ID, pointers forming a tree into that root along fully
/// grown edges, at most one defect and only at the root, and activity equal to
/// "root is a detector holding a defect".
pub fn check_quiescent(window: &Window) -> Vec<Violation> {
    let g = window.geometry();
    let nodes = window.nodes();
    let mut violations = Vec::new();
    for (v, n) in nodes.iter().enumerate() {
        if n.defect && !g.is_detector(v) {
            violations.push(Violation::BoundaryDefect { node: v });
        }
    }
    for members in clusters(window) {
        let root = *members.iter().min_by_key(|&&v| g.id(v)).expect("non-empty");
        let root_id = g.id(root);
        let active = g.is_detector(root) && nodes[root].defect;
        for &v in &members {
            if nodes[v].cid != root_id {
                violations.push(Violation::SplitCid { node: v, cid: nodes[v].cid, expected: root_id });
            }
            if v != root && nodes[v].defect {
                violations.push(Violation::StrayDefect { node: v });
            }
            if nodes[v].active != active {
                violations.push(Violation::WrongActivity { node: v, expected: active });
            }
            // follow pointers to the root
            let mut at = v;
            let mut steps = 0;
            while at != root {
                let dir = nodes[at].pointer;
                if dir == Direction::C {
                    violations.push(Violation::BrokenPointer { node: v });
                    break;
                }
                match g.toward(at, dir) {
                    Some((next, e)) if window.edges()[e].is_full() => at = next,
                    _ => {
                        violations.push(Violation::BrokenPointer { node: v });
                        break;
                    }
                }
                steps += 1;
                if steps > members.len() {
                    violations.push(Violation::PointerCycle { node: v });
                    break;
                }
            }
        }
        if nodes[root].pointer != Direction::C {
            violations.push(Violation::BrokenPointer { node: root });
        }
    }
    violations
}

/// Defect count and boundary contact of each cluster, for the activity rule
/// "inactive iff even defect count or touches a boundary".
pub fn cluster_activity(window: &Window) -> Vec<(Vec<usize>, usize, bool)> {
    let g = window.geometry();
    clusters(window)
        .into_iter()
        .map(|members| {
            let defects = members.iter().filter(|&&v| window.nodes()[v].defect).count();
            let boundary = members.iter().any(|&v| !g.is_detector(v));
            (members, defects, boundary)
        })
        .collect()
}
