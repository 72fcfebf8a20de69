//! Episode lifecycle: reset on a freshly sampled graph path, high-level steps
//! made of proxy substeps, dynamic obstacles, the position buffer, observations,
//! rewards and termination.

mod buffer;
mod config;
mod obstacles;
mod observation;
mod rollout;
mod trial;

pub use buffer::{BufferEntry, PositionBuffer};
pub use config::{EpisodeConfig, ObstacleConfig, Phase, ScanSpec, WaypointMode};
pub use obstacles::{advance_obstacles, obstacle_offset, rasterize_obstacles, DynamicObstacle};
pub use observation::{sample_scan, HLObservation};
pub use rollout::{episode_seed, rollout_batch, run_episode, EpisodeRun, InvariantViolation, RolloutError};
pub use trial::{proxy_traversal_scores, SETTLE_S, STAIR_TRIAL, TRIAL_DIST};

use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{proxy_step, traversal_check, ProxyState, TraversalLimits, VelocityCommand, WheelDrive};
use crate::geom::{world_to_robot, Vec2};
use crate::navgraph::{build_nav_graph, project_onto_path_range, sample_episode_path, AnchorPursuit, NavError, NavGraph, Path, WaypointPair};
use crate::rewards::{hl_reward_terms, ll_reward_terms, regularization_terms, BodyState, JointState, RewardBreakdown};
use crate::seed::{self, SimRng};
use crate::terrain::{synthesize_height_field, HeightField, TerrainError, TerrainParams};
use crate::worldgen::{TileCatalog, TileMap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EpisodeError {
    #[error(transparent)]
    Nav(#[from] NavError),
    #[error("episode already finished")]
    SteppingDoneEpisode,
    #[error("action ({0}, {1}, {2}) outside the action bounds")]
    ActionOutOfBounds(f64, f64, f64),
    #[error("invalid episode config: {0}")]
    Config(String),
}

/// Static world an episode runs in.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub field: HeightField,
    pub graph: NavGraph,
}

#[derive(Debug, Error)]
pub enum WorldBuildError {
    #[error(transparent)]
    Terrain(#[from] TerrainError),
    #[error(transparent)]
    Nav(#[from] NavError),
}

impl World {
    /// Synthesize the height field for `map` and build its navigation graph
    /// with node elevations taken from the field.
    pub fn build(map: &TileMap, catalog: &TileCatalog, params: &TerrainParams, resolution: f64) -> Result<World, WorldBuildError> {
        let field = synthesize_height_field(map, catalog, params, resolution)?;
        let mut graph = build_nav_graph(map, catalog)?;
        graph.attach_elevations(&field);
        Ok(World { field, graph })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    GoalReached,
    Collision,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
}

/// One line of the replay log, written after every high-level step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayRecord {
    pub t: f64,
    pub pose: Pose,
    pub action: [f64; 3],
    pub wp1: Vec2,
    pub wp2: Vec2,
    pub goal: Vec2,
    pub reward: RewardBreakdown,
    pub done: bool,
    pub reason: Option<TerminationReason>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub reward: RewardBreakdown,
    pub done: bool,
    pub reason: Option<TerminationReason>,
    pub record: ReplayRecord,
}

/// Per low-level-step samples kept for evaluation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Telemetry {
    pub cmd: Vec<Vec2>,
    pub real: Vec<Vec2>,
    pub wheel_torque: Vec<[f64; 4]>,
    pub wheel_speed: Vec<[f64; 4]>,
    pub base_speed: Vec<f64>,
}

pub struct EpisodeState {
    world: Arc<World>,
    pub cfg: EpisodeConfig,
    pub seed: u64,
    rng: SimRng,
    pub proxy: ProxyState,
    pub path: Path,
    pub waypoints: WaypointPair,
    waypoint_history: VecDeque<WaypointPair>,
    /// Arc length reached along the path (lookahead mode).
    pub progress: f64,
    anchor: Option<AnchorPursuit>,
    pub buffer: PositionBuffer,
    pub obstacles: Vec<DynamicObstacle>,
    pub hl_steps: usize,
    scans: VecDeque<Vec<f64>>,
    scan_clamped: bool,
    actions: VecDeque<[f64; 3]>,
    drive: WheelDrive,
    pub telemetry: Telemetry,
    pub traveled: f64,
    pub done: bool,
    pub reason: Option<TerminationReason>,
}

/// Draw a new low-level command with probability `prob`, otherwise keep `current`.
pub fn sample_llc_command<R: Rng + ?Sized>(rng: &mut R, current: VelocityCommand, prob: f64) -> VelocityCommand {
    if prob > 0.0 && rng.random::<f64>() < prob {
        VelocityCommand::new(rng.random_range(-2.5..=2.5), rng.random_range(-1.2..=1.2), rng.random_range(-1.5..=1.5))
    } else {
        current
    }
}

/// True if the robot disc at `pos` touches an obstacle footprint or covers a
/// cell that cannot be reached from its centre at standstill.
pub fn collides(field: &HeightField, obstacles: &[DynamicObstacle], pos: Vec2, radius: f64, limits: &TraversalLimits) -> bool {
    if obstacles.iter().any(|o| o.gap(pos, radius) < 0.0) {
        return true;
    }
    let Some((ci, cj)) = field.cell_of(pos) else {
        return true;
    };
    let r = (radius / field.resolution).ceil() as isize;
    for dj in -r..=r {
        for di in -r..=r {
            let (i, j) = (ci as isize + di, cj as isize + dj);
            if i < 0 || j < 0 || i as usize >= field.cols || j as usize >= field.rows {
                continue;
            }
            let c = field.cell_center(i as usize, j as usize);
            if c.dist(pos) <= radius && !traversal_check(field, pos, c, 0.0, limits).unwrap_or(true) {
                return true;
            }
        }
    }
    false
}

impl EpisodeState {
    /// Start an episode on a freshly sampled path.
    pub fn reset(world: Arc<World>, cfg: EpisodeConfig, seed: u64) -> Result<Self, EpisodeError> {
        cfg.validate().map_err(EpisodeError::Config)?;
        let mut rng = seed::rng(seed);
        let path = sample_episode_path(&world.graph, &mut rng, cfg.path_len[0], cfg.path_len[1])?;
        Ok(Self::start(world, cfg, seed, rng, path))
    }

    /// Start an episode on a given path.
    pub fn reset_on_path(world: Arc<World>, cfg: EpisodeConfig, seed: u64, path: Path) -> Result<Self, EpisodeError> {
        cfg.validate().map_err(EpisodeError::Config)?;
        if path.is_empty() {
            return Err(NavError::EmptyPath.into());
        }
        Ok(Self::start(world, cfg, seed, seed::rng(seed), path))
    }

    fn start(world: Arc<World>, cfg: EpisodeConfig, seed: u64, mut rng: SimRng, path: Path) -> Self {
        let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let lookahead = rng.random_range(cfg.lookahead[0]..=cfg.lookahead[1]);
        let start = path.start().expect("non-empty path");
        let proxy = ProxyState::at_rest(&world.field, start, yaw);

        let oc = cfg.obstacles;
        let n_obs = rng.random_range(oc.count[0]..=oc.count[1]);
        let mut obstacles = Vec::with_capacity(n_obs);
        for _ in 0..n_obs {
            let speed = rng.random_range(oc.speed[0]..=oc.speed[1]);
            let extent = Vec2::new(rng.random_range(oc.extent[0]..=oc.extent[1]), rng.random_range(oc.extent[0]..=oc.extent[1]));
            for _ in 0..20 {
                let s = rng.random_range(0.4..=1.0) * path.length;
                let offset = Vec2::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
                let pos = path.point_at(s) + offset;
                let o = DynamicObstacle { pos, extent, speed, height: oc.height };
                if world.field.contains(pos) && o.gap(start, cfg.robot_radius) >= oc.standoff + 1.0 {
                    obstacles.push(o);
                    break;
                }
            }
        }

        let anchor = match cfg.waypoint_mode {
            WaypointMode::Lookahead => None,
            WaypointMode::AnchorPursuit { switch_radius, lookahead } => Some(AnchorPursuit::new(switch_radius, lookahead)),
        };
        let buffer = PositionBuffer::new(cfg.buffer_capacity, cfg.buffer_spacing, start);
        let drive = WheelDrive::new(cfg.actuator);
        let mut st = EpisodeState {
            world,
            cfg,
            seed,
            rng,
            proxy,
            waypoints: WaypointPair::at_arc(&path, 0.0, lookahead),
            path,
            waypoint_history: VecDeque::with_capacity(3),
            progress: 0.0,
            anchor,
            buffer,
            obstacles,
            hl_steps: 0,
            scans: VecDeque::with_capacity(3),
            scan_clamped: false,
            actions: VecDeque::from(vec![[0.0; 3]; 3]),
            drive,
            telemetry: Telemetry::default(),
            traveled: 0.0,
            done: false,
            reason: None,
        };
        st.update_waypoints();
        for _ in 0..3 {
            st.waypoint_history.push_front(st.waypoints);
        }
        let scan = st.current_scan();
        for _ in 0..3 {
            st.scans.push_front(scan.clone());
        }
        st
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn elapsed(&self) -> f64 {
        self.hl_steps as f64 * self.cfg.hl_dt
    }

    pub fn goal(&self) -> Vec2 {
        self.path.end().expect("non-empty path")
    }

    /// Episode-owned random stream, e.g. for stochastic policies.
    pub fn rng(&mut self) -> &mut SimRng {
        &mut self.rng
    }

    fn lookahead(&self) -> f64 {
        self.waypoints.lookahead
    }

    fn update_waypoints(&mut self) {
        let pos = self.proxy.pos;
        let d = self.lookahead();
        self.waypoints = match &mut self.anchor {
            None => {
                let (s, _) = project_onto_path_range(&self.path, pos, self.progress, self.progress + d);
                self.progress = self.progress.max(s);
                WaypointPair::at_arc(&self.path, self.progress, d)
            }
            Some(ap) => {
                let (s, wp1) = ap.select(&self.path, pos);
                let s2 = (s + ap.lookahead).min(self.path.length);
                WaypointPair { wp1, wp2: self.path.point_at(s2), s1: s, s2, lookahead: ap.lookahead }
            }
        };
    }

    fn current_scan(&mut self) -> Vec<f64> {
        let (scan, clamped) = sample_scan(
            &self.world.field,
            &self.obstacles,
            self.cfg.obstacles.human_buffer,
            &self.cfg.scan,
            self.proxy.pos,
            self.proxy.yaw,
            self.proxy.z + self.cfg.base_height,
        );
        self.scan_clamped = clamped;
        scan
    }

    pub fn observation(&self) -> HLObservation {
        let (pos, yaw) = (self.proxy.pos, self.proxy.yaw);
        let rel = |p: Vec2| world_to_robot(p, pos, yaw);
        let mut history: Vec<(Vec2, u32)> = self.buffer.entries().map(|e| (rel(e.pos), e.visit_steps)).collect();
        history.resize(self.cfg.buffer_capacity, (Vec2::ZERO, 0));
        let wp = |k: usize| {
            let w = self.waypoint_history[k];
            (rel(w.wp1), rel(w.wp2))
        };
        let v = &self.proxy.vel;
        HLObservation {
            scan: self.cfg.scan,
            height_scan: [self.scans[0].clone(), self.scans[1].clone(), self.scans[2].clone()],
            llc_state: [v.vx, v.vy, v.wz, self.proxy.tracking_error, self.proxy.slope],
            position_history: history,
            waypoints: [wp(0), wp(1), wp(2)],
            action_history: [self.actions[0], self.actions[1], self.actions[2]],
            out_of_field: self.scan_clamped,
        }
    }

    fn body_state(&self) -> BodyState {
        let v = self.proxy.vel;
        let world = self.proxy.world_velocity();
        BodyState {
            vel_world: [world.x, world.y, 0.0],
            vel_body: [v.vx, v.vy, 0.0],
            ang_vel: [0.0, 0.0, v.wz],
            rot: BodyState::rotation(self.proxy.yaw, -self.proxy.slope),
            base_height: self.cfg.base_height,
        }
    }

    /// Advance one high-level step with a bounded velocity command.
    pub fn step(&mut self, action: VelocityCommand) -> Result<StepOutcome, EpisodeError> {
        if self.done {
            return Err(EpisodeError::SteppingDoneEpisode);
        }
        if !self.cfg.bounds.contains(&action) {
            return Err(EpisodeError::ActionOutOfBounds(action.vx, action.vy, action.wz));
        }
        let dt = self.cfg.ll_dt;
        let mut joints = JointState { wheel_contacts: vec![0, 1, 2, 3], body_contacts: vec![0, 1, 2, 3], ..JointState::default() };
        for _ in 0..self.cfg.substeps() {
            let before = self.proxy;
            self.proxy = proxy_step(&before, &action, &self.world.field, &self.cfg.proxy, dt);
            advance_obstacles(&mut self.obstacles, self.proxy.pos, self.cfg.robot_radius, self.cfg.obstacles.standoff, dt);
            self.traveled += self.proxy.pos.dist(before.pos);
            let speed = self.proxy.vel.vx;
            let accel = (speed - before.vel.vx) / dt;
            let (tau, omega) = self.drive.step(speed, accel, dt);
            joints.wheel_vel = omega;
            self.telemetry.cmd.push(action.linear());
            self.telemetry.real.push(self.proxy.vel.linear());
            self.telemetry.wheel_torque.push(tau);
            self.telemetry.wheel_speed.push(omega);
            self.telemetry.base_speed.push(self.proxy.speed());
        }
        self.hl_steps += 1;
        self.buffer.update(self.proxy.pos);
        self.update_waypoints();
        self.waypoint_history.pop_back();
        self.waypoint_history.push_front(self.waypoints);
        self.actions.pop_back();
        self.actions.push_front(action.to_array());
        let scan = self.current_scan();
        self.scans.pop_back();
        self.scans.push_front(scan);

        let pos = self.proxy.pos;
        let reason = if collides(&self.world.field, &self.obstacles, pos, self.cfg.robot_radius, &self.cfg.proxy.limits) {
            Some(TerminationReason::Collision)
        } else if pos.dist(self.goal()) < self.cfg.goal_radius() {
            Some(TerminationReason::GoalReached)
        } else if self.hl_steps >= self.cfg.max_hl_steps() {
            Some(TerminationReason::Timeout)
        } else {
            None
        };
        self.done = reason.is_some();
        self.reason = reason;

        let hl = hl_reward_terms(pos, self.proxy.world_velocity(), self.waypoints.wp1, &self.buffer.pairs());
        let ll = ll_reward_terms(&self.body_state(), action.to_array());
        let reg = regularization_terms(&joints, self.cfg.rewards.c_k, reason != Some(TerminationReason::Collision));
        let reward = RewardBreakdown::new(hl, ll, reg, &self.cfg.rewards);
        let record = ReplayRecord {
            t: self.elapsed(),
            pose: Pose { x: pos.x, y: pos.y, z: self.proxy.z, yaw: self.proxy.yaw },
            action: action.to_array(),
            wp1: self.waypoints.wp1,
            wp2: self.waypoints.wp2,
            goal: self.goal(),
            reward,
            done: self.done,
            reason,
        };
        Ok(StepOutcome { reward, done: self.done, reason, record })
    }
}
