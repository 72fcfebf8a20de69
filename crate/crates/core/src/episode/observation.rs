use serde::{Deserialize, Serialize};

use super::obstacles::{obstacle_offset, DynamicObstacle};
use super::ScanSpec;
use crate::geom::{robot_to_world, Vec2};
use crate::terrain::HeightField;

/// High-level policy input, expressed in the current robot frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HLObservation {
    pub scan: ScanSpec,
    /// Scans at t, t - hl_dt and t - 2 hl_dt, each `nx * ny` values with x fastest.
    /// Values are terrain (plus obstacle) height minus the robot base height.
    pub height_scan: [Vec<f64>; 3],
    /// Proxy internals: body vx, vy, wz, last tracking error, local slope.
    pub llc_state: [f64; 5],
    /// Buffered positions (relative, robot frame) with visit counts, padded with zeros.
    pub position_history: Vec<(Vec2, u32)>,
    /// Current waypoint pair followed by the two previous pairs.
    pub waypoints: [(Vec2, Vec2); 3],
    /// Last three high-level commands, most recent first.
    pub action_history: [[f64; 3]; 3],
    /// Set when part of the scan window fell outside the height field.
    pub out_of_field: bool,
}

impl HLObservation {
    pub fn wp1(&self) -> Vec2 {
        self.waypoints[0].0
    }

    /// Flat feature vector in a fixed order.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(3 * self.scan.len() + 5 + 3 * self.position_history.len() + 12 + 9);
        for s in &self.height_scan {
            v.extend_from_slice(s);
        }
        v.extend_from_slice(&self.llc_state);
        for (p, n) in &self.position_history {
            v.extend([p.x, p.y, *n as f64]);
        }
        for (a, b) in &self.waypoints {
            v.extend([a.x, a.y, b.x, b.y]);
        }
        for a in &self.action_history {
            v.extend_from_slice(a);
        }
        v
    }
}

/// Sample the scan window around a robot at `pos` with heading `yaw` whose
/// base sits at `base_z`. Returns the values and whether any sample was clamped
/// to the field edge.
pub fn sample_scan(
    field: &HeightField,
    obstacles: &[DynamicObstacle],
    human_buffer: f64,
    spec: &ScanSpec,
    pos: Vec2,
    yaw: f64,
    base_z: f64,
) -> (Vec<f64>, bool) {
    let (nx, ny) = (spec.nx(), spec.ny());
    let mut out = Vec::with_capacity(nx * ny);
    let mut clamped = false;
    for iy in 0..ny {
        for ix in 0..nx {
            let (x, y) = spec.point(ix, iy);
            let p = robot_to_world(Vec2::new(x, y), pos, yaw);
            let (h, outside) = field.height_at_clamped(p);
            clamped |= outside;
            let cell = field.cell_of(p).map(|(i, j)| field.cell_center(i, j)).unwrap_or(p);
            out.push(h + obstacle_offset(cell, obstacles, human_buffer) - base_z);
        }
    }
    (out, clamped)
}
