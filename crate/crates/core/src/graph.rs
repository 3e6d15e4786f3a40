//! Decoding-graph layer templates.
//!
//! A template describes one sheet of nodes (detectors and boundary nodes at a
//! single time coordinate) together with the edges of one layer: the edges
//! inside that sheet plus the edges running up to the next sheet. Stacking
//! copies of the template gives the full spacetime decoding graph.

use std::cmp::Ordering;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Code and noise family of a decoding graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Repetition code under phenomenological noise (planar graph).
    #[serde(rename = "repetition", alias = "repetition-phenomenological")]
    RepetitionPhenomenological,
    /// Rotated surface code under phenomenological noise.
    #[serde(rename = "surface-phenom", alias = "surface-phenomenological")]
    SurfacePhenomenological,
    /// Rotated surface code with the diagonal spacetime edges of a
    /// circuit-level graph, all at a uniform flip probability.
    #[serde(rename = "surface-circuit", alias = "surface-circuit-style")]
    SurfaceCircuitStyle,
}

impl Family {
    pub const ALL: [Family; 3] = [
        Family::RepetitionPhenomenological,
        Family::SurfacePhenomenological,
        Family::SurfaceCircuitStyle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::RepetitionPhenomenological => "repetition",
            Family::SurfacePhenomenological => "surface-phenom",
            Family::SurfaceCircuitStyle => "surface-circuit",
        }
    }

    /// Whether the graph lives in a single spatial dimension.
    pub fn is_planar(self) -> bool {
        matches!(self, Family::RepetitionPhenomenological)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "repetition" | "repetition-phenomenological" => Ok(Family::RepetitionPhenomenological),
            "surface-phenom" | "surface-phenomenological" => Ok(Family::SurfacePhenomenological),
            "surface-circuit" | "surface-circuit-style" | "surface-circuit-level-style" => {
                Ok(Family::SurfaceCircuitStyle)
            }
            other => Err(GraphError::UnsupportedFamily(other.to_string())),
        }
    }
}

/// Pointer / edge direction label. `C` is the centre (no direction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    C,
    N,
    W,
    E,
    S,
    D,
    U,
    NU,
    WD,
    EU,
    SD,
    NWD,
    SEU,
}

impl Direction {
    pub const ALL: [Direction; 13] = [
        Direction::C,
        Direction::N,
        Direction::W,
        Direction::E,
        Direction::S,
        Direction::D,
        Direction::U,
        Direction::NU,
        Direction::WD,
        Direction::EU,
        Direction::SD,
        Direction::NWD,
        Direction::SEU,
    ];

    /// Displacement `(dx, dy, dt)` named by the label.
    pub fn displacement(self) -> (i32, i32, i32) {
        match self {
            Direction::C => (0, 0, 0),
            Direction::N => (0, 1, 0),
            Direction::W => (-1, 0, 0),
            Direction::E => (1, 0, 0),
            Direction::S => (0, -1, 0),
            Direction::D => (0, 0, -1),
            Direction::U => (0, 0, 1),
            Direction::NU => (0, 1, 1),
            Direction::WD => (-1, 0, -1),
            Direction::EU => (1, 0, 1),
            Direction::SD => (0, -1, -1),
            Direction::NWD => (-1, 1, -1),
            Direction::SEU => (1, -1, 1),
        }
    }

    pub fn from_displacement(d: (i32, i32, i32)) -> Option<Direction> {
        Direction::ALL.iter().copied().find(|dir| dir.displacement() == d)
    }

    pub fn opposite(self) -> Direction {
        let (x, y, t) = self.displacement();
        Direction::from_displacement((-x, -y, -t)).expect("direction set is closed under negation")
    }

    /// True for every label with a downward component (`D`, `WD`, `SD`, `NWD`).
    pub fn has_down(self) -> bool {
        self.displacement().2 < 0
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::C => "C",
            Direction::N => "N",
            Direction::W => "W",
            Direction::E => "E",
            Direction::S => "S",
            Direction::D => "D",
            Direction::U => "U",
            Direction::NU => "NU",
            Direction::WD => "WD",
            Direction::EU => "EU",
            Direction::SD => "SD",
            Direction::NWD => "NWD",
            Direction::SEU => "SEU",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Spatial boundary a boundary node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    West,
    East,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Detector,
    Boundary(Side),
}

impl NodeKind {
    pub fn is_boundary(self) -> bool {
        matches!(self, NodeKind::Boundary(_))
    }
}

/// A node of the decoding graph: kind plus lattice position `(x, y, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeDescriptor {
    pub x: i32,
    pub y: i32,
    pub t: i64,
    pub kind: NodeKind,
}

impl NodeDescriptor {
    pub fn is_detector(&self) -> bool {
        self.kind == NodeKind::Detector
    }

    pub fn is_boundary(&self) -> bool {
        self.kind.is_boundary()
    }

    pub fn side(&self) -> Option<Side> {
        match self.kind {
            NodeKind::Boundary(side) => Some(side),
            NodeKind::Detector => None,
        }
    }
}

/// Total ID order: boundary nodes before detectors, then higher sheets first,
/// then lexicographic `(x, y)`.
pub fn id_order(a: &NodeDescriptor, b: &NodeDescriptor) -> Ordering {
    let key = |n: &NodeDescriptor| (n.is_detector(), std::cmp::Reverse(n.t), n.x, n.y);
    key(a).cmp(&key(b))
}

/// The node directly below `n` if `t - 1` is not below `bottom_t`.
pub fn node_below(n: &NodeDescriptor, bottom_t: i64) -> Option<NodeDescriptor> {
    (n.t > bottom_t).then(|| NodeDescriptor { t: n.t - 1, ..*n })
}

/// One edge of a layer. `a` lives in the layer's own sheet; `b` lives in the
/// same sheet (`dt == 0`) or in the sheet above (`dt == 1`). `direction` is
/// the displacement from `a` to `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateEdge {
    pub a: usize,
    pub b: usize,
    pub dt: u8,
    pub direction: Direction,
}

/// An edge of the full spacetime graph: template edge `edge` of layer `layer`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeRef {
    pub layer: i64,
    pub edge: u32,
}

impl EdgeRef {
    pub fn new(layer: i64, edge: usize) -> Self {
        EdgeRef { layer, edge: edge as u32 }
    }
}

/// A node of the full spacetime graph: template node `node` of sheet `sheet`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeRef {
    pub sheet: i64,
    pub node: u32,
}

impl NodeRef {
    pub fn new(sheet: i64, node: usize) -> Self {
        NodeRef { sheet, node: node as u32 }
    }
}

/// The periodic unit of a decoding graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerTemplate {
    pub family: Family,
    pub distance: usize,
    /// Nodes of one sheet, with `t = 0`.
    pub nodes: Vec<NodeDescriptor>,
    pub edges: Vec<TemplateEdge>,
}

impl LayerTemplate {
    pub fn sheet_size(&self) -> usize {
        self.nodes.len()
    }

    pub fn detector_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_detector()).count()
    }

    pub fn boundary_count(&self) -> usize {
        self.nodes.len() - self.detector_count()
    }

    pub fn intra_edges(&self) -> impl Iterator<Item = (usize, &TemplateEdge)> {
        self.edges.iter().enumerate().filter(|(_, e)| e.dt == 0)
    }

    pub fn up_edges(&self) -> impl Iterator<Item = (usize, &TemplateEdge)> {
        self.edges.iter().enumerate().filter(|(_, e)| e.dt == 1)
    }

    pub fn is_boundary_edge(&self, edge: usize) -> bool {
        let e = &self.edges[edge];
        self.nodes[e.a].is_boundary() || self.nodes[e.b].is_boundary()
    }

    /// Absolute endpoints of a spacetime edge.
    pub fn endpoints(&self, edge: EdgeRef) -> (NodeRef, NodeRef) {
        let e = &self.edges[edge.edge as usize];
        (NodeRef::new(edge.layer, e.a), NodeRef::new(edge.layer + i64::from(e.dt), e.b))
    }

    pub fn is_detector(&self, node: NodeRef) -> bool {
        self.nodes[node.node as usize].is_detector()
    }

    pub fn node_at(&self, index: usize, t: i64) -> NodeDescriptor {
        NodeDescriptor { t, ..self.nodes[index] }
    }

    /// Every direction label seen from either endpoint of some edge.
    pub fn direction_set(&self) -> Vec<Direction> {
        let mut dirs: Vec<Direction> = self
            .edges
            .iter()
            .flat_map(|e| [e.direction, e.direction.opposite()])
            .collect();
        dirs.sort();
        dirs.dedup();
        dirs
    }

    /// Indices of the west and east boundary nodes of a sheet.
    pub fn opposite_boundaries(&self) -> (Vec<usize>, Vec<usize>) {
        let pick = |side| {
            self.nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| n.side() == Some(side))
                .map(|(i, _)| i)
                .collect::<Vec<_>>()
        };
        (pick(Side::West), pick(Side::East))
    }

    /// Text adjacency dump, one edge per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} d={}", self.family, self.distance);
        for e in &self.edges {
            let a = &self.nodes[e.a];
            let b = &self.nodes[e.b];
            let kind = if a.is_boundary() || b.is_boundary() { "boundary" } else { "bulk" };
            let _ = writeln!(
                out,
                "({},{},0) ({},{},{}) {} {}",
                a.x, a.y, b.x, b.y, e.dt, e.direction, kind
            );
        }
        out
    }
}

/// Build the periodic layer of a decoding graph for `family` at distance `d`.
pub fn build_template(family: Family, d: usize) -> Result<LayerTemplate, GraphError> {
    if d < 2 {
        return Err(GraphError::DistanceTooSmall(d));
    }
    let mut template = match family {
        Family::RepetitionPhenomenological => repetition(d),
        Family::SurfacePhenomenological => surface(d, false),
        Family::SurfaceCircuitStyle => surface(d, true),
    };
    template.family = family;
    Ok(template)
}

fn repetition(d: usize) -> LayerTemplate {
    let d_i = d as i32;
    let nodes: Vec<NodeDescriptor> = (0..=d_i)
        .map(|x| {
            let kind = if x == 0 {
                NodeKind::Boundary(Side::West)
            } else if x == d_i {
                NodeKind::Boundary(Side::East)
            } else {
                NodeKind::Detector
            };
            NodeDescriptor { x, y: 0, t: 0, kind }
        })
        .collect();
    let mut edges: Vec<TemplateEdge> = (0..d)
        .map(|x| TemplateEdge { a: x, b: x + 1, dt: 0, direction: Direction::E })
        .collect();
    edges.extend((1..d).map(|x| TemplateEdge { a: x, b: x, dt: 1, direction: Direction::U }));
    LayerTemplate { family: Family::RepetitionPhenomenological, distance: d, nodes, edges }
}

/// Rotated surface code, bitflip graph. Z plaquettes sit at corner positions
/// `(a, b)`, `0 <= a, b <= d`, with `a + b` even; the weight-two plaquettes lie
/// on the top and bottom rows. Each data qubit joins the two Z-type corners of
/// its square; a corner without a plaquette becomes a west (`b = 0`) or east
/// (`b = d`) boundary node. Lattice coordinates are `x = (a + b) / 2`,
/// `y = (b - a) / 2`, so every data-qubit edge is a unit step.
fn surface(d: usize, diagonals: bool) -> LayerTemplate {
    let d_i = d as i32;
    let is_plaquette = |a: i32, b: i32| {
        (a + b) % 2 == 0 && (1..d_i).contains(&b) && (0..=d_i).contains(&a)
    };
    let to_xy = |a: i32, b: i32| ((a + b) / 2, (b - a) / 2);

    let mut positions: Vec<(i32, i32, NodeKind)> = Vec::new();
    let mut edge_corners: Vec<((i32, i32), (i32, i32))> = Vec::new();
    for r in 0..d_i {
        for c in 0..d_i {
            let (p, q) = if (r + c) % 2 == 0 {
                ((r, c), (r + 1, c + 1))
            } else {
                ((r, c + 1), (r + 1, c))
            };
            for &(a, b) in &[p, q] {
                let kind = if is_plaquette(a, b) {
                    NodeKind::Detector
                } else if b == 0 {
                    NodeKind::Boundary(Side::West)
                } else {
                    NodeKind::Boundary(Side::East)
                };
                let (x, y) = to_xy(a, b);
                if !positions.iter().any(|&(px, py, _)| px == x && py == y) {
                    positions.push((x, y, kind));
                }
            }
            edge_corners.push((to_xy(p.0, p.1), to_xy(q.0, q.1)));
        }
    }
    positions.sort_by_key(|&(x, y, kind)| (kind == NodeKind::Detector, x, y));
    let nodes: Vec<NodeDescriptor> = positions
        .iter()
        .map(|&(x, y, kind)| NodeDescriptor { x, y, t: 0, kind })
        .collect();
    let index_of = |x: i32, y: i32| nodes.iter().position(|n| n.x == x && n.y == y);

    let mut edges = Vec::new();
    for ((x0, y0), (x1, y1)) in edge_corners {
        let i = index_of(x0, y0).expect("corner registered");
        let j = index_of(x1, y1).expect("corner registered");
        let dir = Direction::from_displacement((x1 - x0, y1 - y0, 0)).expect("unit step");
        // store each intra edge along E or N
        let (a, b, direction) = match dir {
            Direction::E | Direction::N => (i, j, dir),
            _ => (j, i, dir.opposite()),
        };
        edges.push(TemplateEdge { a, b, dt: 0, direction });
    }
    let up_dirs: &[Direction] = if diagonals {
        &[Direction::U, Direction::NU, Direction::EU, Direction::SEU]
    } else {
        &[Direction::U]
    };
    for &dir in up_dirs {
        let (dx, dy, _) = dir.displacement();
        for (i, n) in nodes.iter().enumerate() {
            if let Some(j) = index_of(n.x + dx, n.y + dy) {
                if n.is_detector() || nodes[j].is_detector() {
                    edges.push(TemplateEdge { a: i, b: j, dt: 1, direction: dir });
                }
            }
        }
    }
    LayerTemplate { family: Family::SurfacePhenomenological, distance: d, nodes, edges }
}
