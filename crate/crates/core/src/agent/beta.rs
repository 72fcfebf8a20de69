use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::{ActionBounds, AgentError, VelocityCommand};

/// Actions are pulled this far inside the unit interval before evaluating the
/// log density of a stored action.
pub const LOG_PROB_CLAMP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
    /// Mean and concentration the parameters were built from.
    pub a1: f64,
    pub a2: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, AgentError> {
        if alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite() {
            let a2 = alpha + beta;
            Ok(BetaParams { alpha, beta, a1: alpha / a2, a2 })
        } else {
            Err(AgentError::DomainError(format!("beta parameters ({alpha}, {beta}) must be positive")))
        }
    }

    pub fn mean(&self) -> f64 {
        self.a1
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }

    /// Interior mode when both parameters exceed one.
    pub fn mode(&self) -> Option<f64> {
        (self.alpha > 1.0 && self.beta > 1.0).then(|| (self.alpha - 1.0) / (self.alpha + self.beta - 2.0))
    }

    pub fn ln_beta_fn(&self) -> f64 {
        ln_gamma(self.alpha) + ln_gamma(self.beta) - ln_gamma(self.alpha + self.beta)
    }
}

/// Mean/concentration parameterisation: `alpha = a1 * a2`, `beta = a2 - a1 * a2`.
pub fn beta_from_policy_outputs(a1: f64, a2: f64) -> Result<BetaParams, AgentError> {
    if !(a1 > 0.0 && a1 < 1.0) || !(a2 > 0.0) || !a2.is_finite() {
        return Err(AgentError::DomainError(format!("need a1 in (0, 1) and a2 > 0, got ({a1}, {a2})")));
    }
    let alpha = a1 * a2;
    let p = BetaParams::new(alpha, a2 - alpha)?;
    Ok(BetaParams { a1, a2, ..p })
}

pub fn beta_log_prob(x: f64, p: &BetaParams) -> Result<f64, AgentError> {
    if !(x > 0.0 && x < 1.0) {
        return Err(AgentError::DomainError(format!("x = {x} outside (0, 1)")));
    }
    Ok((p.alpha - 1.0) * x.ln() + (p.beta - 1.0) * (-x).ln_1p() - p.ln_beta_fn())
}

/// Log density of a stored action, clamped away from the support edges.
pub fn log_prob_action(x: f64, p: &BetaParams) -> f64 {
    let x = if x.is_nan() { 0.5 } else { x.clamp(LOG_PROB_CLAMP, 1.0 - LOG_PROB_CLAMP) };
    beta_log_prob(x, p).expect("clamped into the open interval")
}

pub fn beta_sample<R: Rng + ?Sized>(p: &BetaParams, rng: &mut R) -> f64 {
    Beta::new(p.alpha, p.beta).expect("validated parameters").sample(rng)
}

/// Affine map of unit-interval actions onto the command bounds.
pub fn map_to_bounds(u: [f64; 3], bounds: &ActionBounds) -> VelocityCommand {
    let a = bounds.axes();
    VelocityCommand::from_array([0, 1, 2].map(|i| a[i][0] + u[i] * (a[i][1] - a[i][0])))
}
