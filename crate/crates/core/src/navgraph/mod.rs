//! Navigation graph over traversable tiles, shortest paths, episode path
//! sampling and waypoint selection along a path.

mod path;

pub use path::{project_onto_path, project_onto_path_range, waypoints_from_path, AnchorPursuit, Path, WaypointPair};

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec2;
use crate::terrain::HeightField;
use crate::worldgen::{validate_adjacency, Axis, TileCatalog, TileCategory, TileMap, WorldgenError};

/// Default number of endpoint draws before [`sample_episode_path`] gives up.
pub const SAMPLE_RETRIES: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NavError {
    #[error("map violates catalog adjacency in {0} places")]
    IllegalMap(usize),
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error("node {dst} is unreachable from node {src}")]
    Unreachable { src: usize, dst: usize },
    #[error("no path with length in [{min_len}, {max_len}] found after {tries} draws")]
    NoQualifyingPath { min_len: f64, max_len: f64, tries: usize },
    #[error("path is empty")]
    EmptyPath,
    #[error("lookahead must be positive, got {0}")]
    InvalidLookahead(f64),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error(transparent)]
    Worldgen(#[from] WorldgenError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Node {
    pub fn pos(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub len: f64,
}

/// Undirected graph whose node ids are their indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphDoc", into = "GraphDoc")]
pub struct NavGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl TryFrom<GraphDoc> for NavGraph {
    type Error = NavError;
    fn try_from(doc: GraphDoc) -> Result<Self, NavError> {
        for (i, n) in doc.nodes.iter().enumerate() {
            if n.id != i {
                return Err(NavError::InvalidGraph(format!("node at index {i} has id {}", n.id)));
            }
        }
        let pairs = doc.edges.iter().map(|e| (e.a, e.b)).collect();
        let g = NavGraph::new(doc.nodes, pairs)?;
        for (e, f) in g.edges.iter().zip(&doc.edges) {
            if (e.len - f.len).abs() > 1e-9 {
                return Err(NavError::InvalidGraph(format!("edge ({}, {}) length {} is not {}", f.a, f.b, f.len, e.len)));
            }
        }
        Ok(g)
    }
}

impl From<NavGraph> for GraphDoc {
    fn from(g: NavGraph) -> Self {
        GraphDoc { nodes: g.nodes, edges: g.edges }
    }
}

impl NavGraph {
    /// Build from nodes and undirected node pairs; edge lengths are the
    /// horizontal distance between node positions.
    pub fn new(nodes: Vec<Node>, pairs: Vec<(usize, usize)>) -> Result<Self, NavError> {
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut edges = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            if a >= nodes.len() || b >= nodes.len() {
                return Err(NavError::UnknownNode(a.max(b)));
            }
            let len = nodes[a].pos().dist(nodes[b].pos());
            if !(len > 0.0) || !len.is_finite() {
                return Err(NavError::InvalidGraph(format!("edge ({a}, {b}) has length {len}")));
            }
            if adjacency[a].iter().any(|&(n, _)| n == b) {
                return Err(NavError::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
            adjacency[a].push((b, len));
            adjacency[b].push((a, len));
            edges.push(Edge { a, b, len });
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(n, _)| n);
        }
        Ok(NavGraph { nodes, edges, adjacency })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: usize) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn neighbors(&self, id: usize) -> &[(usize, f64)] {
        &self.adjacency[id]
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node whose position is closest to `p` (smaller id on ties).
    pub fn nearest_node(&self, p: Vec2) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for n in &self.nodes {
            let d = n.pos().dist(p);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, n.id));
            }
        }
        best.map(|(_, id)| id)
    }

    /// Overwrite node elevations with the height field value at each node.
    pub fn attach_elevations(&mut self, field: &HeightField) {
        for n in &mut self.nodes {
            n.z = field.height_at_clamped(n.pos()).0;
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, NavError> {
        serde_json::from_str(text).map_err(|e| NavError::InvalidGraph(e.to_string()))
    }
}

fn traversable_pair(a: TileCategory, b: TileCategory, axis: Axis) -> bool {
    use TileCategory::*;
    let along = |c: TileCategory| match c {
        StairX => axis == Axis::X,
        StairY => axis == Axis::Y,
        _ => true,
    };
    match (a, b) {
        (Obstacle, _) | (_, Obstacle) => false,
        (x, y) if x.is_floor() && y.is_floor() => x == y,
        (x, y) if x.is_stair() && y.is_stair() => x == y && along(x),
        (x, y) => along(x) && along(y),
    }
}

/// One node per non-obstacle tile (ids in row-major tile order), edges between
/// 4-neighbours whose pair is allowed by the catalog and traversable: floors
/// only join floors of the same level, stairs only connect along their axis.
pub fn build_nav_graph(map: &TileMap, catalog: &TileCatalog) -> Result<NavGraph, NavError> {
    let violations = validate_adjacency(map, catalog)?;
    if !violations.is_empty() {
        return Err(NavError::IllegalMap(violations.len()));
    }
    let cat = |x: usize, y: usize| catalog.category(map.get(x, y)).expect("validated");
    let mut ids = vec![usize::MAX; map.cells.len()];
    let mut nodes = Vec::new();
    for y in 0..map.height {
        for x in 0..map.width {
            if cat(x, y) != TileCategory::Obstacle {
                let c = map.tile_center(x, y);
                ids[y * map.width + x] = nodes.len();
                nodes.push(Node { id: nodes.len(), x: c.x, y: c.y, z: 0.0 });
            }
        }
    }
    let mut pairs = Vec::new();
    for y in 0..map.height {
        for x in 0..map.width {
            let a = ids[y * map.width + x];
            if a == usize::MAX {
                continue;
            }
            for (nx, ny, axis) in [(x + 1, y, Axis::X), (x, y + 1, Axis::Y)] {
                if nx >= map.width || ny >= map.height {
                    continue;
                }
                let b = ids[ny * map.width + nx];
                if b != usize::MAX
                    && catalog.allows(map.get(x, y), map.get(nx, ny), axis)
                    && traversable_pair(cat(x, y), cat(nx, ny), axis)
                {
                    pairs.push((a, b));
                }
            }
        }
    }
    NavGraph::new(nodes, pairs)
}

#[derive(PartialEq)]
struct Frontier {
    dist: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from `src`, stopping once `stop` is settled. Returns distances and
/// predecessors; among equal-length predecessors the smaller id wins.
fn dijkstra(graph: &NavGraph, src: usize, stop: Option<usize>) -> (Vec<f64>, Vec<usize>) {
    let n = graph.nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Frontier { dist: 0.0, node: src });
    while let Some(Frontier { dist: d, node: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if Some(u) == stop {
            break;
        }
        for &(v, w) in &graph.adjacency[u] {
            if done[v] {
                continue;
            }
            let nd = d + w;
            if nd < dist[v] || (nd == dist[v] && u < pred[v]) {
                if nd < dist[v] {
                    heap.push(Frontier { dist: nd, node: v });
                }
                dist[v] = nd;
                pred[v] = u;
            }
        }
    }
    (dist, pred)
}

/// Single-source shortest distances from `src` (infinite when unreachable).
pub fn shortest_distances(graph: &NavGraph, src: usize) -> Result<Vec<f64>, NavError> {
    if src >= graph.nodes.len() {
        return Err(NavError::UnknownNode(src));
    }
    Ok(dijkstra(graph, src, None).0)
}

pub fn shortest_path(graph: &NavGraph, src: usize, dst: usize) -> Result<Path, NavError> {
    for id in [src, dst] {
        if id >= graph.nodes.len() {
            return Err(NavError::UnknownNode(id));
        }
    }
    let (dist, pred) = dijkstra(graph, src, Some(dst));
    if !dist[dst].is_finite() {
        return Err(NavError::Unreachable { src, dst });
    }
    let mut ids = vec![dst];
    while *ids.last().unwrap() != src {
        ids.push(pred[*ids.last().unwrap()]);
    }
    ids.reverse();
    Ok(Path::from_nodes(graph, ids))
}

/// Rejection-sample an ordered endpoint pair uniformly until the shortest path
/// between them has length in `[min_len, max_len]`.
pub fn sample_episode_path<R: Rng + ?Sized>(
    graph: &NavGraph,
    rng: &mut R,
    min_len: f64,
    max_len: f64,
) -> Result<Path, NavError> {
    sample_episode_path_with(graph, rng, min_len, max_len, SAMPLE_RETRIES)
}

pub fn sample_episode_path_with<R: Rng + ?Sized>(
    graph: &NavGraph,
    rng: &mut R,
    min_len: f64,
    max_len: f64,
    tries: usize,
) -> Result<Path, NavError> {
    let n = graph.nodes.len();
    let fail = NavError::NoQualifyingPath { min_len, max_len, tries };
    if n == 0 || min_len > max_len {
        return Err(fail);
    }
    for _ in 0..tries {
        let src = rng.random_range(0..n);
        let dst = rng.random_range(0..n);
        match shortest_path(graph, src, dst) {
            Ok(p) if p.length >= min_len && p.length <= max_len => return Ok(p),
            _ => {}
        }
    }
    Err(fail)
}
