use serde::{Deserialize, Serialize};

use crate::agent::{ActionBounds, ActuatorModel, ProxyConfig};
use crate::rewards::RewardWeights;

/// Robot-frame scan window sampled on a regular grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub pitch: f64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec { x: [-1.5, 3.0], y: [-1.5, 1.5], pitch: 0.15 }
    }
}

impl ScanSpec {
    pub fn nx(&self) -> usize {
        ((self.x[1] - self.x[0]) / self.pitch + 1e-9).floor() as usize + 1
    }

    pub fn ny(&self) -> usize {
        ((self.y[1] - self.y[0]) / self.pitch + 1e-9).floor() as usize + 1
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Robot-frame coordinates of sample `(ix, iy)`; samples are stored with `ix` fastest.
    pub fn point(&self, ix: usize, iy: usize) -> (f64, f64) {
        (self.x[0] + ix as f64 * self.pitch, self.y[0] + iy as f64 * self.pitch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Train,
    Eval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WaypointMode {
    /// Waypoints at one and two lookahead distances past the robot's progress on the path.
    Lookahead,
    /// Anchor pursuit over the path nodes.
    AnchorPursuit { switch_radius: f64, lookahead: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleConfig {
    pub count: [usize; 2],
    pub speed: [f64; 2],
    pub extent: [f64; 2],
    pub height: f64,
    /// Obstacles stop once the gap between their box and the robot disc is this small (m).
    pub standoff: f64,
    pub human_buffer: f64,
}

impl Default for ObstacleConfig {
    fn default() -> Self {
        ObstacleConfig { count: [0, 3], speed: [0.1, 0.5], extent: [0.3, 1.0], height: 1.0, standoff: 0.3, human_buffer: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeConfig {
    pub hl_dt: f64,
    pub ll_dt: f64,
    pub max_episode_s_train: f64,
    pub max_episode_s_eval: f64,
    pub goal_radius_train: f64,
    pub goal_radius_eval: f64,
    pub gamma_hl: f64,
    pub gamma_ll: f64,
    pub phase: Phase,
    pub obstacles: ObstacleConfig,
    pub scan: ScanSpec,
    pub path_len: [f64; 2],
    pub lookahead: [f64; 2],
    pub waypoint_mode: WaypointMode,
    pub robot_radius: f64,
    pub base_height: f64,
    pub buffer_capacity: usize,
    pub buffer_spacing: f64,
    pub llc_resample_prob: f64,
    pub bounds: ActionBounds,
    pub proxy: ProxyConfig,
    pub actuator: ActuatorModel,
    pub rewards: RewardWeights,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            hl_dt: 0.1,
            ll_dt: 0.02,
            max_episode_s_train: 15.0,
            max_episode_s_eval: 60.0,
            goal_radius_train: 0.75,
            goal_radius_eval: 0.5,
            gamma_hl: 0.991,
            gamma_ll: 0.99,
            phase: Phase::Train,
            obstacles: ObstacleConfig::default(),
            scan: ScanSpec::default(),
            path_len: [5.0, 20.0],
            lookahead: [5.0, 20.0],
            waypoint_mode: WaypointMode::Lookahead,
            robot_radius: 0.35,
            base_height: crate::rewards::BASE_HEIGHT,
            buffer_capacity: 20,
            buffer_spacing: 0.5,
            llc_resample_prob: 0.005,
            bounds: ActionBounds::default(),
            proxy: ProxyConfig::default(),
            actuator: ActuatorModel::default(),
            rewards: RewardWeights::default(),
        }
    }
}

impl EpisodeConfig {
    /// Evaluation settings: longer budget, tighter goal radius, anchor pursuit.
    pub fn eval() -> Self {
        EpisodeConfig {
            phase: Phase::Eval,
            waypoint_mode: WaypointMode::AnchorPursuit { switch_radius: 3.0, lookahead: 3.0 },
            ..EpisodeConfig::default()
        }
    }

    pub fn max_episode_s(&self) -> f64 {
        match self.phase {
            Phase::Train => self.max_episode_s_train,
            Phase::Eval => self.max_episode_s_eval,
        }
    }

    pub fn goal_radius(&self) -> f64 {
        match self.phase {
            Phase::Train => self.goal_radius_train,
            Phase::Eval => self.goal_radius_eval,
        }
    }

    pub fn substeps(&self) -> usize {
        (self.hl_dt / self.ll_dt).round() as usize
    }

    pub fn max_hl_steps(&self) -> usize {
        (self.max_episode_s() / self.hl_dt).round() as usize
    }

    pub fn validate(&self) -> Result<(), String> {
        let ratio = self.hl_dt / self.ll_dt;
        if !(self.ll_dt > 0.0) || !(self.hl_dt > 0.0) || (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return Err(format!("hl_dt {} must be a positive multiple of ll_dt {}", self.hl_dt, self.ll_dt));
        }
        if !(self.goal_radius_train > 0.0 && self.goal_radius_eval > 0.0 && self.robot_radius > 0.0) {
            return Err("radii must be positive".into());
        }
        let o = &self.obstacles;
        if o.count[0] > o.count[1] || !(o.speed[0] > 0.0 && o.speed[0] <= o.speed[1]) || !(o.extent[0] > 0.0 && o.extent[0] <= o.extent[1]) {
            return Err("obstacle ranges must be non-empty and positive".into());
        }
        if !(self.path_len[0] <= self.path_len[1]) || !(self.lookahead[0] > 0.0 && self.lookahead[0] <= self.lookahead[1]) {
            return Err("path length and lookahead ranges must be non-empty".into());
        }
        if !(self.scan.pitch > 0.0) || self.scan.x[0] > self.scan.x[1] || self.scan.y[0] > self.scan.y[1] {
            return Err("invalid scan window".into());
        }
        if self.buffer_capacity == 0 || !(self.buffer_spacing > 0.0) {
            return Err("position buffer needs positive capacity and spacing".into());
        }
        if !(0.0..=1.0).contains(&self.llc_resample_prob) {
            return Err("llc_resample_prob must be a probability".into());
        }
        self.bounds.validate().map_err(|e| e.to_string())?;
        self.rewards.validate()
    }
}
