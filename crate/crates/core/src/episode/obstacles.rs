use serde::{Deserialize, Serialize};

use crate::geom::{dist_to_box, Vec2};
use crate::terrain::HeightField;

/// Axis-aligned box that walks toward the robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicObstacle {
    pub pos: Vec2,
    /// Full box extents along x and y (m).
    pub extent: Vec2,
    pub speed: f64,
    pub height: f64,
}

impl DynamicObstacle {
    /// Gap between the box and a disc of `radius` centred at `p`.
    pub fn gap(&self, p: Vec2, radius: f64) -> f64 {
        dist_to_box(p, self.pos, self.extent) - radius
    }
}

/// Move each obstacle `speed * dt` toward the robot, never closing the gap to
/// the robot disc below `standoff`.
pub fn advance_obstacles(obstacles: &mut [DynamicObstacle], robot: Vec2, robot_radius: f64, standoff: f64, dt: f64) {
    for o in obstacles {
        let to_robot = robot - o.pos;
        let d = to_robot.norm();
        if d == 0.0 {
            continue;
        }
        let gap = o.gap(robot, robot_radius);
        if gap <= standoff {
            continue;
        }
        let dir = to_robot * (1.0 / d);
        let mut step = o.speed * dt;
        let next = o.pos + dir * step;
        let next_gap = dist_to_box(robot, next, o.extent) - robot_radius;
        if next_gap < standoff {
            // Bisect along the motion for the point where the gap equals the standoff.
            let (mut lo, mut hi) = (0.0, step);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if dist_to_box(robot, o.pos + dir * mid, o.extent) - robot_radius >= standoff {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            step = lo;
        }
        o.pos = o.pos + dir * step;
    }
}

/// Height added at `p` by obstacles whose footprint, inflated by `buffer`, covers it.
/// Overlapping obstacles combine by maximum.
pub fn obstacle_offset(p: Vec2, obstacles: &[DynamicObstacle], buffer: f64) -> f64 {
    obstacles
        .iter()
        .filter(|o| dist_to_box(p, o.pos, o.extent) <= buffer)
        .map(|o| o.height)
        .fold(0.0, f64::max)
}

/// Copy of `window` with obstacle heights added at every covered cell centre.
pub fn rasterize_obstacles(window: &HeightField, obstacles: &[DynamicObstacle], buffer: f64) -> HeightField {
    let mut out = window.clone();
    for j in 0..window.rows {
        for i in 0..window.cols {
            let off = obstacle_offset(window.cell_center(i, j), obstacles, buffer);
            if off != 0.0 {
                out.set(i, j, window.get(i, j) + off);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obstacle(x: f64, y: f64, speed: f64) -> DynamicObstacle {
        DynamicObstacle { pos: Vec2::new(x, y), extent: Vec2::new(0.2, 0.2), speed, height: 1.0 }
    }

    #[test]
    fn moves_toward_robot() {
        let mut obs = [obstacle(6.0, 5.0, 0.5)];
        advance_obstacles(&mut obs, Vec2::new(5.0, 5.0), 0.35, 0.3, 0.1);
        assert!((obs[0].pos.x - 5.95).abs() < 1e-12);
        assert_eq!(obs[0].pos.y, 5.0);
    }

    #[test]
    fn coincident_and_standoff_are_stationary() {
        let mut obs = [obstacle(5.0, 5.0, 0.5), obstacle(5.0 + 0.1 + 0.35 + 0.3, 5.0, 0.5)];
        let before = obs;
        advance_obstacles(&mut obs, Vec2::new(5.0, 5.0), 0.35, 0.3, 0.1);
        assert_eq!(obs, before);
    }

    #[test]
    fn stops_exactly_at_standoff() {
        let mut obs = [obstacle(6.0, 5.0, 0.5)];
        for _ in 0..100 {
            advance_obstacles(&mut obs, Vec2::new(5.0, 5.0), 0.35, 0.3, 0.1);
        }
        let gap = obs[0].gap(Vec2::new(5.0, 5.0), 0.35);
        assert!((gap - 0.3).abs() < 1e-9, "{gap}");
    }

    #[test]
    fn rasterisation_rules() {
        let hf = HeightField::flat(40, 40, 0.1, 0.25);
        assert_eq!(rasterize_obstacles(&hf, &[], 0.5), hf);
        let o = DynamicObstacle { pos: Vec2::new(2.0, 2.0), extent: Vec2::new(0.4, 0.4), speed: 0.1, height: 1.0 };
        let out = rasterize_obstacles(&hf, &[o], 0.5);
        for j in 0..40 {
            for i in 0..40 {
                let inside = dist_to_box(hf.cell_center(i, j), o.pos, o.extent) <= 0.5;
                let want = if inside { 1.25 } else { 0.25 };
                assert!((out.get(i, j) - want).abs() < 1e-6);
            }
        }
        let o2 = DynamicObstacle { pos: Vec2::new(2.3, 2.0), ..o };
        let out = rasterize_obstacles(&hf, &[o, o2], 0.5);
        assert!((out.height_at(Vec2::new(2.15, 2.05)).unwrap() - 1.25).abs() < 1e-6);
    }
}
