//! Kinematic proxy robot, traversability rule, actuator model, bounded beta
//! action distribution and the scripted baseline policy.

mod actuator;
mod beta;
mod policy;

pub use actuator::{friction_torque, motor_torque, ActuatorModel, WheelDrive};
pub use beta::{beta_from_policy_outputs, beta_log_prob, beta_sample, log_prob_action, map_to_bounds, BetaParams, LOG_PROB_CLAMP};
pub use policy::ScriptedPolicy;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec2;
use crate::terrain::HeightField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("point ({0}, {1}) lies outside the height field")]
    OutOfField(f64, f64),
    #[error("domain error: {0}")]
    DomainError(String),
}

/// Planar body-frame velocity command.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub vx: f64,
    pub vy: f64,
    pub wz: f64,
}

impl VelocityCommand {
    pub const ZERO: VelocityCommand = VelocityCommand { vx: 0.0, vy: 0.0, wz: 0.0 };

    pub fn new(vx: f64, vy: f64, wz: f64) -> Self {
        VelocityCommand { vx, vy, wz }
    }

    pub fn linear(&self) -> Vec2 {
        Vec2::new(self.vx, self.vy)
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.vx, self.vy, self.wz]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        VelocityCommand { vx: a[0], vy: a[1], wz: a[2] }
    }
}

/// Hard limits on high-level velocity targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionBounds {
    pub vx: [f64; 2],
    pub vy: [f64; 2],
    pub wz: [f64; 2],
}

impl Default for ActionBounds {
    fn default() -> Self {
        ActionBounds { vx: [-1.0, 2.0], vy: [-0.75, 0.75], wz: [-1.25, 1.25] }
    }
}

impl ActionBounds {
    pub fn axes(&self) -> [[f64; 2]; 3] {
        [self.vx, self.vy, self.wz]
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        for [lo, hi] in self.axes() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(AgentError::DomainError(format!("bounds [{lo}, {hi}] are not an interval")));
            }
        }
        Ok(())
    }

    pub fn contains(&self, cmd: &VelocityCommand) -> bool {
        self.axes().iter().zip(cmd.to_array()).all(|([lo, hi], v)| *lo <= v && v <= *hi)
    }

    pub fn clamp(&self, cmd: VelocityCommand) -> VelocityCommand {
        let a = self.axes();
        let c = cmd.to_array();
        VelocityCommand::from_array([0, 1, 2].map(|i| c[i].clamp(a[i][0], a[i][1])))
    }
}

/// Speed-dependent step limits for the proxy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraversalLimits {
    /// Largest climbable rise at standstill (m).
    pub h_up: f64,
    /// Largest safe drop at standstill (m).
    pub h_down: f64,
    /// Fraction by which both limits shrink at `shrink_speed`.
    pub shrink: f64,
    pub shrink_speed: f64,
    pub slope_max: f64,
}

impl Default for TraversalLimits {
    fn default() -> Self {
        TraversalLimits { h_up: 0.20, h_down: 0.35, shrink: 0.5, shrink_speed: 2.0, slope_max: 0.45 }
    }
}

impl TraversalLimits {
    fn scale(&self, speed: f64) -> f64 {
        1.0 - self.shrink * (speed.abs() / self.shrink_speed).min(1.0)
    }

    pub fn up_at(&self, speed: f64) -> f64 {
        self.h_up * self.scale(speed)
    }

    pub fn down_at(&self, speed: f64) -> f64 {
        self.h_down * self.scale(speed)
    }
}

/// Whether the proxy can move from `from` to `to` at `speed`: every rise between
/// samples spaced half a cell apart must stay under the ascend limit, every drop
/// under the descend limit, and the field's tilt along the motion must not exceed
/// the slope limit (itself capped by the friction angle).
pub fn traversal_check(
    field: &HeightField,
    from: Vec2,
    to: Vec2,
    speed: f64,
    limits: &TraversalLimits,
) -> Result<bool, AgentError> {
    for p in [from, to] {
        if !field.contains(p) {
            return Err(AgentError::OutOfField(p.x, p.y));
        }
    }
    let d = to - from;
    let len = d.norm();
    if len == 0.0 {
        return Ok(true);
    }
    let mu = field.friction_at(from).unwrap_or(1.0);
    let tilt = (field.slope.tan() * d.x / len).atan().abs();
    if tilt > limits.slope_max.min(mu.atan()) {
        return Ok(false);
    }
    let (up, down) = (limits.up_at(speed), limits.down_at(speed));
    let n = (len / (0.5 * field.resolution)).ceil().max(1.0) as usize;
    let mut prev = field.height_at(from).expect("checked");
    for k in 1..=n {
        let h = field.height_at(from.lerp(to, k as f64 / n as f64)).unwrap_or(prev);
        let dh = h - prev;
        if dh > up || -dh > down {
            return Ok(false);
        }
        prev = h;
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProxyConfig {
    /// First-order velocity tracking time constant (s).
    pub tau: f64,
    /// Absolute caps on the body velocity (vx, vy, wz).
    pub caps: [f64; 3],
    pub limits: TraversalLimits,
}

impl Default for ProxyConfig {
    fn default() -> Self {
        ProxyConfig { tau: 0.3, caps: [2.5, 1.2, 1.5], limits: TraversalLimits::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxyState {
    pub pos: Vec2,
    pub z: f64,
    pub yaw: f64,
    /// Body-frame velocity.
    pub vel: VelocityCommand,
    pub tracking_error: f64,
    /// Terrain pitch along the heading (rad).
    pub slope: f64,
}

impl ProxyState {
    pub fn at_rest(field: &HeightField, pos: Vec2, yaw: f64) -> Self {
        ProxyState {
            pos,
            z: field.height_at_clamped(pos).0,
            yaw,
            vel: VelocityCommand::ZERO,
            tracking_error: 0.0,
            slope: local_slope(field, pos, yaw),
        }
    }

    /// Planar velocity in the world frame.
    pub fn world_velocity(&self) -> Vec2 {
        self.vel.linear().rotated(self.yaw)
    }

    pub fn speed(&self) -> f64 {
        self.vel.linear().norm()
    }
}

fn local_slope(field: &HeightField, pos: Vec2, yaw: f64) -> f64 {
    let h = Vec2::new(yaw.cos(), yaw.sin()) * 0.3;
    let (a, _) = field.height_at_clamped(pos + h);
    let (b, _) = field.height_at_clamped(pos - h);
    ((a - b) / 0.6).atan()
}

/// Advance the proxy by `dt`: body velocity relaxes toward `cmd` with time
/// constant `tau`, the pose integrates the new velocity, and any world-frame
/// motion component that fails the traversal check is dropped.
pub fn proxy_step(state: &ProxyState, cmd: &VelocityCommand, field: &HeightField, cfg: &ProxyConfig, dt: f64) -> ProxyState {
    let a = (dt / cfg.tau).min(1.0);
    let v0 = state.vel.to_array();
    let c = cmd.to_array();
    let mut v = [0, 1, 2].map(|i| (v0[i] + (c[i] - v0[i]) * a).clamp(-cfg.caps[i], cfg.caps[i]));

    let yaw = state.yaw;
    let world = Vec2::new(v[0], v[1]).rotated(yaw);
    let speed = world.norm();
    let ok = |d: Vec2| traversal_check(field, state.pos, state.pos + d, speed, &cfg.limits).unwrap_or(false);
    let full = world * dt;
    let moved = if ok(full) {
        world
    } else {
        let (wx, wy) = (Vec2::new(world.x, 0.0), Vec2::new(0.0, world.y));
        match (ok(wx * dt), ok(wy * dt)) {
            (true, true) if wx.norm() >= wy.norm() => wx,
            (true, true) => wy,
            (true, false) => wx,
            (false, true) => wy,
            (false, false) => Vec2::ZERO,
        }
    };
    if moved != world {
        let body = moved.rotated(-yaw);
        v[0] = body.x;
        v[1] = body.y;
    }
    let pos = state.pos + moved * dt;
    let yaw = crate::geom::wrap_angle(yaw + v[2] * dt);
    let vel = VelocityCommand::from_array(v);
    ProxyState {
        pos,
        z: field.height_at_clamped(pos).0,
        yaw,
        vel,
        tracking_error: (cmd.linear() - vel.linear()).norm(),
        slope: local_slope(field, pos, yaw),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat() -> HeightField {
        HeightField::flat(100, 100, 0.1, 0.0)
    }

    #[test]
    fn matched_command_is_pure_integration() {
        let hf = flat();
        let mut s = ProxyState::at_rest(&hf, Vec2::new(5.0, 5.0), 0.0);
        s.vel = VelocityCommand::new(1.0, 0.5, 0.0);
        let n = proxy_step(&s, &s.vel.clone(), &hf, &ProxyConfig::default(), 0.02);
        assert!((n.pos - Vec2::new(5.02, 5.01)).norm() < 1e-12);
        assert_eq!(n.vel, s.vel);
    }

    #[test]
    fn wall_blocks_motion() {
        let hf = HeightField::from_fn(100, 100, 0.1, |p| if p.x > 6.0 { 1.0 } else { 0.0 });
        let mut s = ProxyState::at_rest(&hf, Vec2::new(5.99, 5.0), 0.0);
        let cmd = VelocityCommand::new(1.0, 0.0, 0.0);
        s.vel = cmd;
        let n = proxy_step(&s, &cmd, &hf, &ProxyConfig::default(), 0.02);
        assert_eq!(n.pos, s.pos);
        assert_eq!(n.vel.vx, 0.0);
    }

    #[test]
    fn blocked_axis_slides() {
        let hf = HeightField::from_fn(100, 100, 0.1, |p| if p.x > 6.0 { 1.0 } else { 0.0 });
        let s = ProxyState { vel: VelocityCommand::new(1.0, 0.0, 0.0), ..ProxyState::at_rest(&hf, Vec2::new(5.99, 5.0), 0.5) };
        let n = proxy_step(&s, &s.vel.clone(), &hf, &ProxyConfig::default(), 0.02);
        assert_eq!(n.pos.x, s.pos.x);
        assert!(n.pos.y > s.pos.y);
    }

    #[test]
    fn step_response_time_constant() {
        let hf = flat();
        let cfg = ProxyConfig::default();
        let mut s = ProxyState::at_rest(&hf, Vec2::new(1.0, 5.0), 0.0);
        let cmd = VelocityCommand::new(1.0, 0.0, 0.0);
        let dt = 0.001;
        let steps = (3.0 * cfg.tau / dt).round() as usize;
        for _ in 0..steps {
            s = proxy_step(&s, &cmd, &hf, &cfg, dt);
        }
        let expected = 1.0 - (-3.0f64).exp();
        assert!((s.vel.vx - expected).abs() < 2e-3, "{}", s.vel.vx);
    }

    #[test]
    fn step_limits_are_asymmetric() {
        let lim = TraversalLimits::default();
        let h = 0.27;
        let hf = HeightField::from_fn(40, 10, 0.1, |p| if p.x > 2.0 { h } else { 0.0 });
        let lo = Vec2::new(1.5, 0.5);
        let hi = Vec2::new(2.5, 0.5);
        assert!(!traversal_check(&hf, lo, hi, 0.0, &lim).unwrap());
        assert!(traversal_check(&hf, hi, lo, 0.0, &lim).unwrap());
        let hf = HeightField::from_fn(40, 10, 0.1, |p| if p.x > 2.0 { lim.h_up + 0.01 } else { 0.0 });
        assert!(!traversal_check(&hf, lo, hi, 0.0, &lim).unwrap());
        assert!(traversal_check(&flat(), lo, hi, 2.0, &lim).unwrap());
        assert!(matches!(traversal_check(&hf, lo, Vec2::new(9.0, 0.5), 0.0, &lim), Err(AgentError::OutOfField(..))));
    }

    #[test]
    fn limits_shrink_with_speed() {
        let lim = TraversalLimits::default();
        assert!(lim.down_at(0.0) > lim.up_at(0.0));
        assert!((lim.up_at(2.0) - 0.10).abs() < 1e-12);
        assert!(lim.up_at(1.0) < lim.up_at(0.5));
        assert_eq!(lim.up_at(3.0), lim.up_at(2.0));
    }

    #[test]
    fn steep_tilt_is_refused() {
        let mut hf = HeightField::from_fn(40, 40, 0.1, |p| p.x * 0.6f64.tan());
        hf.slope = 0.6;
        let lim = TraversalLimits { h_up: 1.0, ..TraversalLimits::default() };
        assert!(!traversal_check(&hf, Vec2::new(1.0, 1.0), Vec2::new(1.5, 1.0), 0.0, &lim).unwrap());
        assert!(traversal_check(&hf, Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.5), 0.0, &lim).unwrap());
    }
}
