use serde::{Deserialize, Serialize};

use super::ActionBounds;
use crate::episode::HLObservation;

/// Pure-pursuit baseline: turn toward the first waypoint, drive forward when
/// roughly facing it, slow down for rises in the scan, and veer away from tall
/// returns (obstacles) in the lane ahead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScriptedPolicy {
    pub bounds: ActionBounds,
    pub heading_gain: f64,
    /// Forward speed when the lane ahead is clear (m/s).
    pub cruise: f64,
    /// Forward speed when a step is detected ahead (m/s).
    pub careful: f64,
    /// Rise above the robot's footing that counts as a step (m).
    pub rise_threshold: f64,
    /// Rise that counts as an obstacle to steer around (m).
    pub block_threshold: f64,
    /// Distance over which the robot slows down when approaching the waypoint (m).
    pub approach: f64,
    pub base_height: f64,
}

impl Default for ScriptedPolicy {
    fn default() -> Self {
        ScriptedPolicy {
            bounds: ActionBounds::default(),
            heading_gain: 2.0,
            cruise: 1.5,
            careful: 0.4,
            rise_threshold: 0.06,
            block_threshold: 0.5,
            approach: 1.5,
            base_height: crate::rewards::BASE_HEIGHT,
        }
    }
}

impl ScriptedPolicy {
    /// Highest rise in the robot-frame box `x0..x1`, `|y| <= half_width`.
    fn max_rise(&self, obs: &HLObservation, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        let spec = &obs.scan;
        let mut best = f64::NEG_INFINITY;
        for iy in 0..spec.ny() {
            for ix in 0..spec.nx() {
                let (x, y) = spec.point(ix, iy);
                if x >= x0 && x <= x1 && y >= y0 && y <= y1 {
                    best = best.max(obs.height_scan[0][iy * spec.nx() + ix] + self.base_height);
                }
            }
        }
        best
    }

    /// Body-frame velocity command before normalisation.
    pub fn command(&self, obs: &HLObservation) -> [f64; 3] {
        let wp = obs.wp1();
        let dist = wp.norm();
        let heading = if dist > 1e-9 { wp.y.atan2(wp.x) } else { 0.0 };
        let mut wz = self.heading_gain * heading;
        let facing = heading.cos().max(0.0);
        let mut vx = self.cruise * facing * facing * (dist / self.approach).min(1.0);

        let rise = self.max_rise(obs, 0.2, 1.2, -0.3, 0.3);
        if rise > self.rise_threshold {
            vx = vx.min(self.careful);
        }
        if heading.abs() < 0.5 && self.max_rise(obs, 0.2, 1.5, -0.45, 0.45) > self.block_threshold {
            let left = self.max_rise(obs, 0.2, 1.5, 0.45, 1.5);
            let right = self.max_rise(obs, 0.2, 1.5, -1.5, -0.45);
            let turn = self.bounds.wz[1];
            wz = if left <= right { turn } else { -turn };
            vx = vx.min(self.careful * 0.5);
        }
        // Something tall is about to touch the body: stop and sidestep.
        let mut vy = 0.0;
        if self.max_rise(obs, 0.0, 0.3, -0.3, 0.3) > self.block_threshold {
            let left = self.max_rise(obs, -0.3, 0.6, 0.3, 1.2);
            let right = self.max_rise(obs, -0.3, 0.6, -1.2, -0.3);
            vx = vx.min(0.0);
            vy = if left <= right { self.careful } else { -self.careful };
        }
        let [lo_x, hi_x] = self.bounds.vx;
        let [lo_w, hi_w] = self.bounds.wz;
        let [lo_y, hi_y] = self.bounds.vy;
        [vx.clamp(lo_x, hi_x), vy.clamp(lo_y, hi_y), wz.clamp(lo_w, hi_w)]
    }

    /// Action in the unit cube, ready for `map_to_bounds`.
    pub fn act(&self, obs: &HLObservation) -> [f64; 3] {
        let c = self.command(obs);
        let axes = self.bounds.axes();
        [0, 1, 2].map(|i| ((c[i] - axes[i][0]) / (axes[i][1] - axes[i][0])).clamp(0.0, 1.0))
    }
}
