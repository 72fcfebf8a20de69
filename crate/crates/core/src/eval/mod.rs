//! Evaluation metrics over episode results and logs: success, SPL, mechanical
//! cost of transport and velocity-tracking statistics, plus report writers.

mod report;

pub use report::{bucket_table, EpisodeSummary, MetricsReport, PartialStats, TrackingReport, LENGTH_BUCKETS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::episode::ReplayRecord;
use crate::geom::Vec2;

pub const SUCCESS_RADIUS: f64 = 0.5;
pub const SUCCESS_BUDGET_S: f64 = 60.0;
pub const COT_SPEED_FLOOR: f64 = 0.2;
pub const TRACKING_CMD_FLOOR: f64 = 0.5;
pub const LOW_PASS_HZ: f64 = 5.0;
pub const HIST_BIN: f64 = 0.05;
pub const HIST_MAX: f64 = 2.0;

/// Thresholds used when scoring episodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalThresholds {
    pub success_radius: f64,
    pub success_budget_s: f64,
    pub cot_speed_floor: f64,
    pub tracking_cmd_floor: f64,
}

impl Default for EvalThresholds {
    fn default() -> Self {
        EvalThresholds {
            success_radius: SUCCESS_RADIUS,
            success_budget_s: SUCCESS_BUDGET_S,
            cot_speed_floor: COT_SPEED_FLOOR,
            tracking_cmd_floor: TRACKING_CMD_FLOOR,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no episode results")]
    EmptyResults,
    #[error("episode {0} has non-positive shortest length")]
    NonpositiveShortestLen(usize),
    #[error("malformed log: {0}")]
    MalformedLog(String),
    #[error("no samples pass the qualification threshold")]
    NoQualifyingSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub success: bool,
    /// Graph geodesic from start to goal (m).
    pub shortest_len: f64,
    pub traveled_len: f64,
    pub duration: f64,
}

/// Success weighted by `shortest / max(traveled, shortest)`, averaged.
pub fn spl(results: &[EpisodeResult]) -> Result<f64, EvalError> {
    if results.is_empty() {
        return Err(EvalError::EmptyResults);
    }
    let mut total = 0.0;
    for (i, r) in results.iter().enumerate() {
        if !(r.shortest_len > 0.0) {
            return Err(EvalError::NonpositiveShortestLen(i));
        }
        if r.success {
            total += r.shortest_len / r.traveled_len.max(r.shortest_len);
        }
    }
    Ok(total / results.len() as f64)
}

pub fn success_rate(results: &[EpisodeResult]) -> Result<f64, EvalError> {
    if results.is_empty() {
        return Err(EvalError::EmptyResults);
    }
    Ok(results.iter().filter(|r| r.success).count() as f64 / results.len() as f64)
}

/// Whether the robot came strictly within `radius` of the final goal at some
/// logged time no later than `budget`.
pub fn success(log: &[ReplayRecord], radius: f64, budget: f64) -> Result<bool, EvalError> {
    let first = log.first().ok_or_else(|| EvalError::MalformedLog("empty log".into()))?;
    let goal = first.goal;
    let mut last_t = f64::NEG_INFINITY;
    for r in log {
        if r.goal != goal {
            return Err(EvalError::MalformedLog(format!("goal changes at t = {}", r.t)));
        }
        if !(r.t > last_t) || !r.t.is_finite() {
            return Err(EvalError::MalformedLog(format!("time does not increase at t = {}", r.t)));
        }
        last_t = r.t;
    }
    Ok(log.iter().any(|r| r.t <= budget && Vec2::new(r.pose.x, r.pose.y).dist(goal) < radius))
}

/// Per-sample joint torques and speeds with base speed and total weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLog {
    pub torques: Vec<Vec<f64>>,
    pub joint_speeds: Vec<Vec<f64>>,
    pub base_speed: Vec<f64>,
    /// Total weight m·g (N).
    pub weight: f64,
    pub sample_rate: f64,
}

impl EnergyLog {
    pub fn validate(&self) -> Result<(), EvalError> {
        let n = self.base_speed.len();
        if self.torques.len() != n || self.joint_speeds.len() != n {
            return Err(EvalError::MalformedLog("energy log arrays differ in length".into()));
        }
        if self.torques.iter().zip(&self.joint_speeds).any(|(t, s)| t.len() != s.len()) {
            return Err(EvalError::MalformedLog("torque and speed rows differ in width".into()));
        }
        if !(self.sample_rate > 0.0) || !(self.weight > 0.0) {
            return Err(EvalError::MalformedLog("sample rate and weight must be positive".into()));
        }
        Ok(())
    }

    /// Sum of per-sample cost of transport and the number of qualifying samples.
    pub fn cot_partial(&self, speed_floor: f64) -> Result<PartialStats, EvalError> {
        self.validate()?;
        let mut acc = PartialStats::default();
        for ((tau, omega), &v) in self.torques.iter().zip(&self.joint_speeds).zip(&self.base_speed) {
            if v.abs() > speed_floor {
                let power: f64 = tau.iter().zip(omega).map(|(t, w)| (t * w).max(0.0)).sum();
                acc.push(power / (self.weight * v.abs()));
            }
        }
        Ok(acc)
    }
}

/// Mean of `sum_j max(tau_j * omega_j, 0) / (m g |v|)` over samples faster than `speed_floor`.
pub fn mechanical_cot(log: &EnergyLog, speed_floor: f64) -> Result<f64, EvalError> {
    log.cot_partial(speed_floor)?.mean().ok_or(EvalError::NoQualifyingSamples)
}

/// Single-pole low-pass at `cutoff` Hz, initialised with the first sample.
pub fn low_pass(samples: &[Vec2], sample_rate: f64, cutoff: f64) -> Vec<Vec2> {
    let dt = 1.0 / sample_rate;
    let rc = 1.0 / (std::f64::consts::TAU * cutoff);
    let a = dt / (rc + dt);
    let mut out = Vec::with_capacity(samples.len());
    let mut y = match samples.first() {
        Some(&s) => s,
        None => return out,
    };
    for &x in samples {
        y = y + (x - y) * a;
        out.push(y);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingStats {
    pub mean: f64,
    pub bin_width: f64,
    /// Sample counts per bin over `[0, 2]` m/s; larger errors land in the last bin.
    pub bins: Vec<u64>,
}

pub fn histogram_bin(err: f64) -> usize {
    let n = (HIST_MAX / HIST_BIN).round() as usize;
    ((err / HIST_BIN).floor().max(0.0) as usize).min(n - 1)
}

/// Low-pass filtered tracking errors, restricted to samples whose command speed
/// exceeds `cmd_floor`.
pub fn tracking_partial(cmd: &[Vec2], real: &[Vec2], sample_rate: f64, cmd_floor: f64) -> Result<PartialStats, EvalError> {
    if cmd.len() != real.len() {
        return Err(EvalError::MalformedLog("command and velocity logs differ in length".into()));
    }
    let fc = low_pass(cmd, sample_rate, LOW_PASS_HZ);
    let fr = low_pass(real, sample_rate, LOW_PASS_HZ);
    let mut acc = PartialStats::with_histogram();
    for i in 0..cmd.len() {
        if cmd[i].norm() > cmd_floor {
            acc.push((fc[i] - fr[i]).norm());
        }
    }
    Ok(acc)
}

pub fn tracking_error_stats(cmd: &[Vec2], real: &[Vec2], sample_rate: f64, cmd_floor: f64) -> Result<TrackingStats, EvalError> {
    tracking_partial(cmd, real, sample_rate, cmd_floor)?.tracking().ok_or(EvalError::NoQualifyingSamples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::episode::Pose;
    use crate::rewards::RewardBreakdown;

    fn res(success: bool, l: f64, p: f64) -> EpisodeResult {
        EpisodeResult { success, shortest_len: l, traveled_len: p, duration: 10.0 }
    }

    #[test]
    fn spl_examples() {
        assert_eq!(spl(&[res(true, 10.0, 10.0)]).unwrap(), 1.0);
        assert_eq!(spl(&[res(true, 10.0, 20.0)]).unwrap(), 0.5);
        assert_eq!(spl(&[res(false, 10.0, 3.0)]).unwrap(), 0.0);
        assert_eq!(spl(&[res(true, 10.0, 5.0)]).unwrap(), 1.0);
        assert!(matches!(spl(&[]), Err(EvalError::EmptyResults)));
        assert!(matches!(spl(&[res(true, 0.0, 1.0)]), Err(EvalError::NonpositiveShortestLen(0))));
    }

    fn record(t: f64, x: f64) -> ReplayRecord {
        ReplayRecord {
            t,
            pose: Pose { x, y: 0.0, z: 0.0, yaw: 0.0 },
            action: [0.0; 3],
            wp1: Vec2::ZERO,
            wp2: Vec2::ZERO,
            goal: Vec2::new(10.0, 0.0),
            reward: RewardBreakdown::default(),
            done: false,
            reason: None,
        }
    }

    #[test]
    fn success_examples() {
        assert!(success(&[record(10.0, 5.0), record(30.0, 9.6)], 0.5, 60.0).unwrap());
        assert!(!success(&[record(10.0, 9.4), record(30.0, 9.4)], 0.5, 60.0).unwrap());
        assert!(!success(&[record(30.0, 5.0), record(61.0, 9.6)], 0.5, 60.0).unwrap());
        assert!(success(&[], 0.5, 60.0).is_err());
        assert!(success(&[record(3.0, 0.0), record(2.0, 0.0)], 0.5, 60.0).is_err());
    }

    fn energy(tau: f64, omega: f64, v: f64) -> EnergyLog {
        EnergyLog { torques: vec![vec![tau]], joint_speeds: vec![vec![omega]], base_speed: vec![v], weight: 100.0, sample_rate: 50.0 }
    }

    #[test]
    fn cot_examples() {
        assert!((mechanical_cot(&energy(1.0, 2.0, 2.0), 0.2).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(mechanical_cot(&energy(-1.0, 2.0, 2.0), 0.2).unwrap(), 0.0);
        assert!(matches!(mechanical_cot(&energy(1.0, 2.0, 0.1), 0.2), Err(EvalError::NoQualifyingSamples)));
        assert_eq!(mechanical_cot(&energy(2.0, 2.0, 2.0), 0.2).unwrap(), 2.0 * mechanical_cot(&energy(1.0, 2.0, 2.0), 0.2).unwrap());
    }

    #[test]
    fn tracking_examples() {
        let cmd: Vec<Vec2> = (0..200).map(|i| Vec2::new(1.0 + 0.005 * i as f64, 0.0)).collect();
        let s = tracking_error_stats(&cmd, &cmd, 50.0, 0.5).unwrap();
        assert_eq!(s.mean, 0.0);
        let real: Vec<Vec2> = cmd.iter().map(|c| *c - Vec2::new(0.33, 0.0)).collect();
        let s = tracking_error_stats(&cmd, &real, 50.0, 0.5).unwrap();
        assert!((s.mean - 0.33).abs() < 1e-12);
        assert_eq!(s.bins.iter().filter(|&&b| b > 0).count(), 1);
        assert_eq!(s.bins.iter().sum::<u64>(), 200);
        let slow = vec![Vec2::new(0.2, 0.0); 10];
        assert!(tracking_error_stats(&slow, &slow, 50.0, 0.5).is_err());
    }

    #[test]
    fn low_pass_step_response() {
        let mut x = vec![Vec2::ZERO];
        x.extend(std::iter::repeat_n(Vec2::new(1.0, 0.0), 500));
        let y = low_pass(&x, 1000.0, 5.0);
        let tau = 1.0 / (std::f64::consts::TAU * 5.0);
        let k = (tau * 1000.0).round() as usize;
        assert!((y[k].x - (1.0 - (-1.0f64).exp())).abs() < 0.01);
    }
}
