use serde::{Deserialize, Serialize};

use super::{NavError, NavGraph};
use crate::geom::Vec2;

/// A polyline through graph nodes with cumulative arc length per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub points: Vec<Vec2>,
    pub arc: Vec<f64>,
    pub length: f64,
}

impl Path {
    pub fn from_nodes(graph: &NavGraph, nodes: Vec<usize>) -> Path {
        let points = nodes.iter().map(|&i| graph.nodes[i].pos()).collect();
        Path::with_ids(nodes, points)
    }

    /// A path over free points; node ids are the point indices.
    pub fn from_points(points: Vec<Vec2>) -> Path {
        Path::with_ids((0..points.len()).collect(), points)
    }

    fn with_ids(nodes: Vec<usize>, points: Vec<Vec2>) -> Path {
        let mut arc = Vec::with_capacity(points.len());
        let mut s = 0.0;
        for (i, p) in points.iter().enumerate() {
            if i > 0 {
                s += points[i - 1].dist(*p);
            }
            arc.push(s);
        }
        Path { nodes, points, arc, length: s }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> Option<Vec2> {
        self.points.first().copied()
    }

    pub fn end(&self) -> Option<Vec2> {
        self.points.last().copied()
    }

    /// Point at arc length `s`, clamped to the path.
    pub fn point_at(&self, s: f64) -> Vec2 {
        let n = self.points.len();
        if n == 1 || s <= 0.0 {
            return self.points[0];
        }
        if s >= self.length {
            return self.points[n - 1];
        }
        let k = self.arc.partition_point(|&a| a <= s).clamp(1, n - 1);
        let seg = self.arc[k] - self.arc[k - 1];
        self.points[k - 1].lerp(self.points[k], (s - self.arc[k - 1]) / seg)
    }
}

/// Closest point on the path and its arc length; ties go to the smaller arc length.
pub fn project_onto_path(path: &Path, pos: Vec2) -> (f64, Vec2) {
    project_onto_path_range(path, pos, 0.0, f64::INFINITY)
}

/// Like [`project_onto_path`] but restricted to the arc-length window `[s_lo, s_hi]`.
pub fn project_onto_path_range(path: &Path, pos: Vec2, s_lo: f64, s_hi: f64) -> (f64, Vec2) {
    let n = path.points.len();
    let s_lo = s_lo.clamp(0.0, path.length);
    let s_hi = s_hi.clamp(s_lo, path.length);
    let first = path.point_at(s_lo);
    if n == 1 || s_hi <= s_lo {
        return (s_lo, first);
    }
    let mut best = (s_lo, first, pos.dist_sq(first));
    for k in 1..n {
        let (a0, a1) = (path.arc[k - 1], path.arc[k]);
        if a1 < s_lo || a0 > s_hi || a1 == a0 {
            continue;
        }
        let (p, q) = (path.points[k - 1], path.points[k]);
        let seg = a1 - a0;
        let t_lo = ((s_lo - a0) / seg).max(0.0);
        let t_hi = ((s_hi - a0) / seg).min(1.0);
        let d = q - p;
        let t = ((pos - p).dot(d) / d.norm_sq()).clamp(t_lo, t_hi);
        let c = p.lerp(q, t);
        let dd = pos.dist_sq(c);
        if dd < best.2 {
            best = (a0 + t * seg, c, dd);
        }
    }
    (best.0, best.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaypointPair {
    pub wp1: Vec2,
    pub wp2: Vec2,
    /// Arc lengths of `wp1` and `wp2`.
    pub s1: f64,
    pub s2: f64,
    pub lookahead: f64,
}

impl WaypointPair {
    pub fn at_arc(path: &Path, s: f64, lookahead: f64) -> WaypointPair {
        let s1 = (s + lookahead).min(path.length);
        let s2 = (s + 2.0 * lookahead).min(path.length);
        WaypointPair { wp1: path.point_at(s1), wp2: path.point_at(s2), s1, s2, lookahead }
    }
}

/// Waypoints `d` and `2d` ahead of the robot's projection onto the path; both
/// collapse onto the final node at the end of the path.
pub fn waypoints_from_path(path: &Path, robot_pos: Vec2, d: f64) -> Result<WaypointPair, NavError> {
    if path.is_empty() {
        return Err(NavError::EmptyPath);
    }
    if !(d > 0.0) {
        return Err(NavError::InvalidLookahead(d));
    }
    let (s, _) = project_onto_path(path, robot_pos);
    Ok(WaypointPair::at_arc(path, s, d))
}

/// Deployment-time waypoint selector. Each node is an anchor that must be
/// approached within `switch_radius` before the target may move past it.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorPursuit {
    pub switch_radius: f64,
    pub lookahead: f64,
    next: usize,
}

impl Default for AnchorPursuit {
    fn default() -> Self {
        AnchorPursuit::new(3.0, 3.0)
    }
}

impl AnchorPursuit {
    pub fn new(switch_radius: f64, lookahead: f64) -> Self {
        AnchorPursuit { switch_radius, lookahead, next: 0 }
    }

    /// Index of the next anchor not yet approached.
    pub fn next_anchor(&self) -> usize {
        self.next
    }

    pub fn target(&mut self, path: &Path, robot_pos: Vec2) -> Vec2 {
        self.select(path, robot_pos).1
    }

    /// Like [`AnchorPursuit::target`] but also returns the target's arc length.
    pub fn select(&mut self, path: &Path, robot_pos: Vec2) -> (f64, Vec2) {
        let n = path.points.len();
        if n <= 1 {
            return (0.0, path.points.first().copied().unwrap_or(robot_pos));
        }
        let anchor = self.next;
        if robot_pos.dist(path.points[anchor]) < self.switch_radius {
            if self.next + 1 < n {
                self.next += 1;
            }
            return (path.arc[anchor], path.points[anchor]);
        }
        let limit = path.arc[anchor];
        let (s, _) = project_onto_path_range(path, robot_pos, 0.0, limit);
        let s = (s + self.lookahead).min(limit);
        (s, path.point_at(s))
    }
}
