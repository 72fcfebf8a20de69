use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EpisodeConfig, EpisodeError, EpisodeState, ReplayRecord, WaypointMode, World};
use crate::agent::{map_to_bounds, ScriptedPolicy};
use crate::eval::{self, EnergyLog, EpisodeSummary, EvalThresholds};
use crate::seed::{derive, tags};

/// Description of a broken episode invariant, written as a diagnostic dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantViolation {
    pub episode: usize,
    pub seed: u64,
    pub hl_step: usize,
    pub what: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RolloutError {
    Episode(usize, EpisodeError),
    Invariant(InvariantViolation),
}

impl std::fmt::Display for RolloutError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RolloutError::Episode(i, e) => write!(f, "episode {i}: {e}"),
            RolloutError::Invariant(v) => write!(f, "episode {} step {}: {}", v.episode, v.hl_step, v.what),
        }
    }
}

impl std::error::Error for RolloutError {}

pub struct EpisodeRun {
    pub records: Vec<ReplayRecord>,
    pub summary: EpisodeSummary,
}

impl EpisodeState {
    /// Check the step-level invariants; `prev_s1` is the previous first-waypoint arc length.
    pub fn check_invariants(&self, prev_s1: f64) -> Result<(), String> {
        let entries: Vec<_> = self.buffer.entries().collect();
        for w in entries.windows(2) {
            if w[0].pos.dist(w[1].pos) < self.buffer.spacing - 1e-9 {
                return Err(format!("buffer entries {:?} and {:?} closer than spacing", w[0].pos, w[1].pos));
            }
        }
        if entries.len() > self.buffer.capacity {
            return Err("buffer over capacity".into());
        }
        if self.cfg.waypoint_mode == WaypointMode::Lookahead && self.waypoints.s1 < prev_s1 {
            return Err(format!("waypoint arc length went back from {prev_s1} to {}", self.waypoints.s1));
        }
        let [lo, hi] = self.cfg.obstacles.speed;
        if let Some(o) = self.obstacles.iter().find(|o| o.speed < lo || o.speed > hi) {
            return Err(format!("obstacle speed {} outside [{lo}, {hi}]", o.speed));
        }
        if !self.proxy.pos.is_finite() || !self.proxy.z.is_finite() || !self.proxy.yaw.is_finite() {
            return Err("non-finite pose".into());
        }
        Ok(())
    }

    pub fn energy_log(&self) -> EnergyLog {
        let t = &self.telemetry;
        EnergyLog {
            torques: t.wheel_torque.iter().map(|r| r.to_vec()).collect(),
            joint_speeds: t.wheel_speed.iter().map(|r| r.to_vec()).collect(),
            base_speed: t.base_speed.clone(),
            weight: self.drive.weight(),
            sample_rate: 1.0 / self.cfg.ll_dt,
        }
    }
}

/// Run one episode with the scripted policy until it terminates.
pub fn run_episode(
    world: Arc<World>,
    cfg: &EpisodeConfig,
    policy: &ScriptedPolicy,
    thresholds: &EvalThresholds,
    index: usize,
    seed: u64,
) -> Result<EpisodeRun, RolloutError> {
    let mut st = EpisodeState::reset(world, cfg.clone(), seed).map_err(|e| RolloutError::Episode(index, e))?;
    let violation = |st: &EpisodeState, what: String| {
        RolloutError::Invariant(InvariantViolation { episode: index, seed, hl_step: st.hl_steps, what })
    };
    st.check_invariants(0.0).map_err(|w| violation(&st, w))?;
    let start = st.proxy.pos;
    let mut records = Vec::new();
    while !st.done {
        let prev = st.waypoints.s1;
        let u = policy.act(&st.observation());
        let cmd = map_to_bounds(u, &st.cfg.bounds);
        let out = st.step(cmd).map_err(|e| RolloutError::Episode(index, e))?;
        st.check_invariants(prev).map_err(|w| violation(&st, w))?;
        records.push(out.record);
    }
    let success = eval::success(&records, thresholds.success_radius, thresholds.success_budget_s)
        .map_err(|e| violation(&st, e.to_string()))?;
    let cot = st.energy_log().cot_partial(thresholds.cot_speed_floor).map_err(|e| violation(&st, e.to_string()))?;
    let tracking = eval::tracking_partial(&st.telemetry.cmd, &st.telemetry.real, 1.0 / cfg.ll_dt, thresholds.tracking_cmd_floor)
        .map_err(|e| violation(&st, e.to_string()))?;
    let summary = EpisodeSummary {
        index,
        seed,
        start,
        goal: st.goal(),
        shortest_len: st.path.length,
        traveled_len: st.traveled,
        duration: st.elapsed(),
        success,
        reason: st.reason,
        cot,
        tracking,
    };
    Ok(EpisodeRun { records, summary })
}

/// Seed of episode `index` in a batch seeded with `seed`.
pub fn episode_seed(seed: u64, index: usize) -> u64 {
    derive(seed, tags::EPISODE, index as u64)
}

/// Run `episodes` independent episodes in parallel on the current rayon pool;
/// results are ordered by episode index.
pub fn rollout_batch(
    world: Arc<World>,
    cfg: &EpisodeConfig,
    policy: &ScriptedPolicy,
    thresholds: &EvalThresholds,
    episodes: usize,
    seed: u64,
) -> Result<Vec<EpisodeRun>, RolloutError> {
    (0..episodes)
        .into_par_iter()
        .map(|i| run_episode(world.clone(), cfg, policy, thresholds, i, episode_seed(seed, i)))
        .collect()
}
