//! Reward terms for the high-level navigation policy, the low-level locomotion
//! policy and the shared regularisers, plus their weighted composition.

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;

/// Radius around the first waypoint that counts as reached (m).
pub const GOAL_RADIUS: f64 = 0.75;
/// Velocity toward the waypoint that saturates the dense reward (m/s).
pub const V_THRES: f64 = 0.5;
/// Buffered positions closer than this contribute to the exploration cost (m).
pub const EXPLORATION_RADIUS: f64 = 1.0;
pub const STABILITY_GAIN: f64 = 2.0;
pub const LIN_VEL_GAIN: f64 = 2.0;
pub const ANG_VEL_GAIN: f64 = 2.0;
/// Commands slower than this are treated as "stand still" (m/s).
pub const STILL_COMMAND: f64 = 0.05;
pub const STILL_SCALE: f64 = 2.0;
pub const BODY_VZ_COEF: f64 = 1.25;
pub const BODY_WXY_COEF: f64 = 0.4;
pub const BASE_HEIGHT: f64 = 0.55;
pub const BASE_HEIGHT_BAND: f64 = 0.05;
pub const JOINT_ACC_COEF: f64 = 0.01;
pub const GAIT_MATCH_REWARD: f64 = 0.1;
pub const DEFAULT_C_K: f64 = 0.001;
pub const DEFAULT_W_L: f64 = 0.3;
/// Knee joint indices (third joint of each leg).
pub const KNEE_JOINTS: [usize; 4] = [2, 5, 8, 11];
/// Knee flip thresholds (rad); the sign gives the forbidden direction.
pub const KNEE_LIMITS: [f64; 4] = [2.2, 2.2, -2.2, -2.2];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HlTerms {
    pub goal: f64,
    pub dense: f64,
    pub exploration: f64,
    pub stability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LlTerms {
    pub lin_vel: f64,
    pub ang_vel: f64,
    pub body_motion: f64,
    pub orientation: f64,
    pub base_height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RegTerms {
    pub torque: f64,
    pub joint_motion: f64,
    pub action_smooth: f64,
    pub joint_limit: f64,
    pub body_contact: f64,
    pub survival: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub hl: HlTerms,
    pub ll: LlTerms,
    pub reg: RegTerms,
    pub r_low: f64,
    pub r_high: f64,
}

impl RewardBreakdown {
    pub fn new(hl: HlTerms, ll: LlTerms, reg: RegTerms, weights: &RewardWeights) -> Self {
        let mut b = RewardBreakdown { hl, ll, reg, r_low: 0.0, r_high: 0.0 };
        b.r_low = compose_reward(&b, weights, Level::Low);
        b.r_high = compose_reward(&b, weights, Level::High);
        b
    }
}

/// Per-term weights. Orientation and base-height terms are magnitudes, so their
/// default weights are negative.
///
/// | term | default |
/// |---|---|
/// | goal, dense, stability | 1.0 |
/// | exploration | 0.1 |
/// | lin_vel, body_motion | 1.0 |
/// | ang_vel | 0.5 |
/// | orientation, base_height | -1.0 |
/// | torque | 1e-4 |
/// | joint_motion, action_smooth, joint_limit, body_contact | 1.0 |
/// | survival | 0.1 |
/// | w_l | 0.3 |
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    pub goal: f64,
    pub dense: f64,
    pub exploration: f64,
    pub stability: f64,
    pub lin_vel: f64,
    pub ang_vel: f64,
    pub body_motion: f64,
    pub orientation: f64,
    pub base_height: f64,
    pub torque: f64,
    pub joint_motion: f64,
    pub action_smooth: f64,
    pub joint_limit: f64,
    pub body_contact: f64,
    pub survival: f64,
    pub w_l: f64,
    /// Scale of the joint-motion and action-smoothness penalties.
    pub c_k: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            goal: 1.0,
            dense: 1.0,
            exploration: 0.1,
            stability: 1.0,
            lin_vel: 1.0,
            ang_vel: 0.5,
            body_motion: 1.0,
            orientation: -1.0,
            base_height: -1.0,
            torque: 1e-4,
            joint_motion: 1.0,
            action_smooth: 1.0,
            joint_limit: 1.0,
            body_contact: 1.0,
            survival: 0.1,
            w_l: DEFAULT_W_L,
            c_k: DEFAULT_C_K,
        }
    }
}

impl RewardWeights {
    pub fn zero() -> Self {
        RewardWeights {
            goal: 0.0,
            dense: 0.0,
            exploration: 0.0,
            stability: 0.0,
            lin_vel: 0.0,
            ang_vel: 0.0,
            body_motion: 0.0,
            orientation: 0.0,
            base_height: 0.0,
            torque: 0.0,
            joint_motion: 0.0,
            action_smooth: 0.0,
            joint_limit: 0.0,
            body_contact: 0.0,
            survival: 0.0,
            w_l: 0.0,
            c_k: DEFAULT_C_K,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.goal,
            self.dense,
            self.exploration,
            self.stability,
            self.lin_vel,
            self.ang_vel,
            self.body_motion,
            self.orientation,
            self.base_height,
            self.torque,
            self.joint_motion,
            self.action_smooth,
            self.joint_limit,
            self.body_contact,
            self.survival,
            self.w_l,
            self.c_k,
        ];
        if all.iter().all(|w| w.is_finite()) {
            Ok(())
        } else {
            Err("reward weights must be finite".into())
        }
    }
}

/// High-level terms from the robot position `p`, planar velocity `v` (world
/// frame), first waypoint and buffered `(position, visit_steps)` pairs.
pub fn hl_reward_terms(p: Vec2, v: Vec2, wp1: Vec2, buffer: &[(Vec2, u32)]) -> HlTerms {
    let e = wp1 - p;
    let dist = e.norm();
    let near = dist < GOAL_RADIUS;
    let goal = if near { 1.0 } else { 0.0 };
    let dense = if near { 1.0 } else { v.dot(e * (1.0 / dist)).clamp(0.0, V_THRES) / V_THRES };
    let exploration = if near {
        0.0
    } else {
        0.0 - buffer.iter().filter(|(q, _)| p.dist(*q) < EXPLORATION_RADIUS).map(|&(_, n)| n as f64).sum::<f64>()
    };
    let stability = if near { (-STABILITY_GAIN * v.norm_sq()).exp() } else { 0.0 };
    HlTerms { goal, dense, exploration, stability }
}

/// Rigid-body state of the base. Velocities are 3-vectors; `rot` maps body to
/// world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyState {
    pub vel_world: [f64; 3],
    pub vel_body: [f64; 3],
    pub ang_vel: [f64; 3],
    pub rot: [[f64; 3]; 3],
    pub base_height: f64,
}

impl BodyState {
    pub fn level(base_height: f64) -> Self {
        BodyState {
            vel_world: [0.0; 3],
            vel_body: [0.0; 3],
            ang_vel: [0.0; 3],
            rot: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            base_height,
        }
    }

    /// Rotation by `yaw` about z followed by `pitch` about the body y axis.
    pub fn rotation(yaw: f64, pitch: f64) -> [[f64; 3]; 3] {
        let (cy, sy) = (yaw.cos(), yaw.sin());
        let (cp, sp) = (pitch.cos(), pitch.sin());
        [[cy * cp, -sy, cy * sp], [sy * cp, cy, sy * sp], [-sp, 0.0, cp]]
    }

    pub fn orthonormality_error(&self) -> f64 {
        let r = &self.rot;
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                worst = worst.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }
}

/// Low-level tracking terms for a body-frame command `(vx, vy, wz)`.
pub fn ll_reward_terms(body: &BodyState, cmd: [f64; 3]) -> LlTerms {
    let v_xy = Vec2::new(body.vel_body[0], body.vel_body[1]);
    let v_des = Vec2::new(cmd[0], cmd[1]);
    let lin_vel = if v_des.norm() < STILL_COMMAND {
        STILL_SCALE * (-LIN_VEL_GAIN * v_xy.norm_sq()).exp()
    } else {
        (-LIN_VEL_GAIN * (v_xy - v_des).norm_sq()).exp() + v_des.dot(v_xy)
    };
    let dw = body.ang_vel[2] - cmd[2];
    let ang_vel = (-ANG_VEL_GAIN * dw * dw).exp();
    let body_motion = -BODY_VZ_COEF * body.vel_body[2] * body.vel_body[2]
        - BODY_WXY_COEF * body.ang_vel[0].abs()
        - BODY_WXY_COEF * body.ang_vel[1].abs();
    let tilt = body.rot[2][2].clamp(-1.0, 1.0).acos();
    let base_height = ((body.base_height - BASE_HEIGHT).abs() - BASE_HEIGHT_BAND).max(0.0);
    LlTerms { lin_vel, ang_vel, body_motion, orientation: tilt * tilt, base_height }
}

/// Joint-space state for the regularisers. Joint arrays follow the order
/// (hip abduction, hip flexion, knee) per leg.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct JointState {
    pub q: [f64; 12],
    pub qd: [f64; 12],
    pub qdd: [f64; 12],
    pub tau: [f64; 12],
    pub wheel_vel: [f64; 4],
    /// Joint position targets at t, t-1, t-2.
    pub q_des: [[f64; 12]; 3],
    /// Link indices currently in contact, and which of those are wheels.
    pub body_contacts: Vec<usize>,
    pub wheel_contacts: Vec<usize>,
    pub foot_contact: [bool; 4],
}

pub fn regularization_terms(joints: &JointState, c_k: f64, alive: bool) -> RegTerms {
    let torque = -joints.tau.iter().map(|t| t * t).sum::<f64>();
    let joint_motion =
        -c_k * joints.qd.iter().zip(&joints.qdd).map(|(v, a)| v * v + JOINT_ACC_COEF * a * a).sum::<f64>();
    let [d0, d1, d2] = &joints.q_des;
    let action_smooth = -c_k
        * (0..12)
            .map(|i| {
                let first = d0[i] - d1[i];
                let second = d0[i] - 2.0 * d1[i] + d2[i];
                first * first + second * second
            })
            .sum::<f64>();
    let joint_limit = -KNEE_JOINTS
        .iter()
        .zip(KNEE_LIMITS)
        .map(|(&j, th)| {
            let over = (th.signum() * (joints.q[j] - th)).max(0.0);
            over * over
        })
        .sum::<f64>();
    let body_only = joints.body_contacts.iter().filter(|c| !joints.wheel_contacts.contains(c)).count();
    RegTerms {
        torque,
        joint_motion,
        action_smooth,
        joint_limit,
        body_contact: -(body_only as f64),
        survival: if alive { 1.0 } else { 0.0 },
    }
}

pub fn gait_tracking_reward(fc: [bool; 4], fc_target: [bool; 4]) -> f64 {
    GAIT_MATCH_REWARD * fc.iter().zip(&fc_target).filter(|(a, b)| a == b).count() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Low,
    High,
}

pub fn compose_reward(b: &RewardBreakdown, w: &RewardWeights, level: Level) -> f64 {
    let (ll, reg, hl) = (&b.ll, &b.reg, &b.hl);
    let low = w.lin_vel * ll.lin_vel
        + w.ang_vel * ll.ang_vel
        + w.body_motion * ll.body_motion
        + w.orientation * ll.orientation
        + w.base_height * ll.base_height
        + w.torque * reg.torque
        + w.joint_motion * reg.joint_motion
        + w.action_smooth * reg.action_smooth
        + w.joint_limit * reg.joint_limit
        + w.body_contact * reg.body_contact
        + w.survival * reg.survival;
    match level {
        Level::Low => low,
        Level::High => {
            w.goal * hl.goal + w.dense * hl.dense + w.exploration * hl.exploration + w.stability * hl.stability
                + w.w_l * low
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn hl_examples() {
        let wp1 = Vec2::new(10.0, 0.0);
        let t = hl_reward_terms(Vec2::new(9.5, 0.0), Vec2::ZERO, wp1, &[(Vec2::new(9.5, 0.0), 3)]);
        assert_eq!(t, HlTerms { goal: 1.0, dense: 1.0, exploration: 0.0, stability: 1.0 });
        let t = hl_reward_terms(Vec2::new(5.0, 0.0), Vec2::new(1.0, 0.0), wp1, &[]);
        assert!((t.dense - 1.0).abs() < TOL);
        let t = hl_reward_terms(Vec2::new(5.0, 0.0), Vec2::new(0.0, 1.0), wp1, &[]);
        assert_eq!(t.dense, 0.0);
        let t = hl_reward_terms(Vec2::new(5.0, 0.0), Vec2::new(-1.0, 0.0), wp1, &[]);
        assert_eq!(t.dense, 0.0);
        let t = hl_reward_terms(Vec2::new(0.0, 0.0), Vec2::ZERO, wp1, &[(Vec2::ZERO, 7)]);
        assert_eq!(t.exploration, -7.0);
        assert_eq!(t.stability, 0.0);
    }

    #[test]
    fn ll_examples() {
        let mut b = BodyState::level(0.55);
        assert!((ll_reward_terms(&b, [0.0; 3]).lin_vel - 2.0).abs() < TOL);
        b.vel_body = [1.0, 0.0, 0.0];
        assert!((ll_reward_terms(&b, [1.0, 0.0, 0.0]).lin_vel - 2.0).abs() < TOL);
        assert_eq!(ll_reward_terms(&b, [1.0, 0.0, 0.0]).orientation, 0.0);
        b.rot = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        assert!((ll_reward_terms(&b, [0.0; 3]).orientation - pi2).abs() < TOL);
        b.base_height = 0.58;
        assert_eq!(ll_reward_terms(&b, [0.0; 3]).base_height, 0.0);
        b.base_height = 0.65;
        assert!((ll_reward_terms(&b, [0.0; 3]).base_height - 0.05).abs() < TOL);
    }

    #[test]
    fn reg_examples() {
        let z = JointState::default();
        assert_eq!(regularization_terms(&z, DEFAULT_C_K, true), RegTerms { survival: 1.0, ..RegTerms::default() });
        let mut j = JointState::default();
        j.q[KNEE_JOINTS[0]] = KNEE_LIMITS[0] + 0.1;
        assert!((regularization_terms(&j, DEFAULT_C_K, true).joint_limit + 0.01).abs() < TOL);
        let mut j = JointState::default();
        j.q_des = [[0.3; 12]; 3];
        assert_eq!(regularization_terms(&j, DEFAULT_C_K, true).action_smooth, 0.0);
        let j = JointState { body_contacts: vec![0, 1, 10, 11, 12, 13], wheel_contacts: vec![10, 11, 12, 13], ..JointState::default() };
        assert_eq!(regularization_terms(&j, DEFAULT_C_K, true).body_contact, -2.0);
    }

    #[test]
    fn gait_examples() {
        let a = [true, false, true, false];
        assert!((gait_tracking_reward(a, a) - 0.4).abs() < TOL);
        assert_eq!(gait_tracking_reward(a, [false, true, false, true]), 0.0);
        assert!((gait_tracking_reward(a, [true, true, false, false]) - 0.2).abs() < TOL);
    }

    #[test]
    fn composition() {
        let b = RewardBreakdown::new(
            HlTerms { goal: 1.0, dense: 0.5, exploration: -2.0, stability: 0.25 },
            LlTerms { lin_vel: 1.5, ang_vel: 0.75, body_motion: -0.125, orientation: 0.0625, base_height: 0.5 },
            RegTerms { torque: -4.0, joint_motion: -0.5, action_smooth: -0.25, joint_limit: -1.0, body_contact: -2.0, survival: 1.0 },
            &RewardWeights::zero(),
        );
        assert_eq!((b.r_low, b.r_high), (0.0, 0.0));
        let mut unit = RewardWeights { w_l: 1.0, ..RewardWeights::zero() };
        for w in [
            &mut unit.goal, &mut unit.dense, &mut unit.exploration, &mut unit.stability, &mut unit.lin_vel,
            &mut unit.ang_vel, &mut unit.body_motion, &mut unit.orientation, &mut unit.base_height,
            &mut unit.torque, &mut unit.joint_motion, &mut unit.action_smooth, &mut unit.joint_limit,
            &mut unit.body_contact, &mut unit.survival,
        ] {
            *w = 1.0;
        }
        let low = 1.5 + 0.75 - 0.125 + 0.0625 + 0.5 - 4.0 - 0.5 - 0.25 - 1.0 - 2.0 + 1.0;
        assert!((compose_reward(&b, &unit, Level::Low) - low).abs() < TOL);
        assert!((compose_reward(&b, &unit, Level::High) - (1.0 + 0.5 - 2.0 + 0.25 + low)).abs() < TOL);
        let hl_only = RewardWeights { w_l: 0.0, ..unit };
        assert!((compose_reward(&b, &hl_only, Level::High) - (-0.25)).abs() < TOL);
    }
}
