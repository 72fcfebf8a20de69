use serde::{Deserialize, Serialize};

/// Joint drive constants. Torque is `k_tau * gear_ratio * current`; the joint
/// loses `c1 * speed + c2 * sgn(speed)` to friction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActuatorModel {
    pub k_tau: f64,
    pub gear_ratio: f64,
    pub c1: f64,
    pub c2: f64,
    /// Time constant of the current response to a current target (s).
    pub current_lag: f64,
}

impl Default for ActuatorModel {
    fn default() -> Self {
        ActuatorModel { k_tau: 0.05, gear_ratio: 10.0, c1: 0.001, c2: 0.02, current_lag: 0.01 }
    }
}

/// `-c1 * speed - c2 * sgn(speed)`, with `sgn(0) = 0`.
pub fn friction_torque(joint_vel: f64, model: &ActuatorModel) -> f64 {
    let sgn = if joint_vel > 0.0 {
        1.0
    } else if joint_vel < 0.0 {
        -1.0
    } else {
        0.0
    };
    -model.c1 * joint_vel - model.c2 * sgn
}

pub fn motor_torque(current: f64, model: &ActuatorModel) -> f64 {
    model.k_tau * model.gear_ratio * current
}

/// Four driven wheels on flat ground used to produce actuator torque and speed
/// samples for energy accounting. Each wheel's current follows its target with
/// a first-order lag; the target is the current whose torque overcomes rolling
/// resistance, inertia and joint friction.
#[derive(Debug, Clone, PartialEq)]
pub struct WheelDrive {
    pub model: ActuatorModel,
    pub mass: f64,
    pub wheel_radius: f64,
    pub rolling_resistance: f64,
    currents: [f64; 4],
}

pub const GRAVITY: f64 = 9.81;

impl WheelDrive {
    pub fn new(model: ActuatorModel) -> Self {
        WheelDrive { model, mass: 50.0, wheel_radius: 0.1, rolling_resistance: 0.01, currents: [0.0; 4] }
    }

    pub fn weight(&self) -> f64 {
        self.mass * GRAVITY
    }

    /// Returns per-wheel actuator torques and wheel speeds after `dt`.
    pub fn step(&mut self, speed: f64, accel: f64, dt: f64) -> ([f64; 4], [f64; 4]) {
        let omega = speed / self.wheel_radius;
        let resist = if speed > 0.0 {
            1.0
        } else if speed < 0.0 {
            -1.0
        } else {
            0.0
        };
        let force = self.rolling_resistance * self.weight() * resist + self.mass * accel;
        let load = 0.25 * force * self.wheel_radius;
        let target = (load - friction_torque(omega, &self.model)) / (self.model.k_tau * self.model.gear_ratio);
        let a = (dt / self.model.current_lag).min(1.0);
        let mut torques = [0.0; 4];
        for (i, c) in self.currents.iter_mut().enumerate() {
            *c += (target - *c) * a;
            torques[i] = motor_torque(*c, &self.model);
        }
        (torques, [omega; 4])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn friction_examples() {
        let m = ActuatorModel { c1: 0.1, c2: 0.0, ..ActuatorModel::default() };
        assert!((friction_torque(2.0, &m) + 0.2).abs() < 1e-15);
        let m = ActuatorModel { c1: 0.0, c2: 0.5, ..ActuatorModel::default() };
        assert_eq!(friction_torque(-3.0, &m), 0.5);
        assert_eq!(friction_torque(0.0, &ActuatorModel::default()), 0.0);
        let m = ActuatorModel::default();
        for v in [0.3, 1.7, 25.0] {
            assert_eq!(friction_torque(-v, &m), -friction_torque(v, &m));
        }
    }

    #[test]
    fn motor_torque_examples() {
        let m = ActuatorModel { k_tau: 0.05, gear_ratio: 10.0, ..ActuatorModel::default() };
        assert!((motor_torque(2.0, &m) - 1.0).abs() < 1e-15);
        assert_eq!(motor_torque(0.0, &m), 0.0);
        assert_eq!(motor_torque(2.0 * 1.3, &m), 2.0 * motor_torque(1.3, &m));
    }

    #[test]
    fn steady_driving_torque_balances_load() {
        let mut d = WheelDrive::new(ActuatorModel::default());
        let mut out = ([0.0; 4], [0.0; 4]);
        for _ in 0..200 {
            out = d.step(1.0, 0.0, 0.02);
        }
        let omega = 10.0;
        let load = 0.25 * 0.01 * d.weight() * 0.1;
        let expected = load + 0.001 * omega + 0.02;
        assert!((out.0[0] - expected).abs() < 1e-9);
        assert_eq!(out.1, [omega; 4]);
    }
}
