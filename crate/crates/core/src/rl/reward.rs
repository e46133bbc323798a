use serde::{Deserialize, Serialize};

use crate::snake::Observation;
use crate::{Error, Result};

/// Distances below this are treated as this for the potential term.
pub const MIN_GOAL_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    /// Weight on the velocity toward the goal.
    pub c_v: f64,
    /// Weight on the potential-field and goal-range terms.
    pub c_g: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self { c_v: 1.0, c_g: 0.5 }
    }
}

impl RewardConfig {
    pub fn check(&self) -> Result<()> {
        if self.c_v > 0.0 && self.c_g > 0.0 && self.c_v.is_finite() && self.c_g.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!("reward weights must be > 0, got {self:?}")))
        }
    }
}

/// Conical potential-field term: velocity along the goal direction divided
/// by the goal distance.
pub fn potential(obs: &Observation) -> f64 {
    let v = obs.velocity[0] * obs.goal_dir[0] + obs.velocity[1] * obs.goal_dir[1];
    v / obs.rho.max(MIN_GOAL_DISTANCE)
}

/// `sum 1/r_k` over the acceptance radii the head is inside of.
pub fn range_bonus(rho: f64, radii: &[f64]) -> f64 {
    radii.iter().filter(|&&r| rho < r).map(|r| 1.0 / r).sum()
}

/// Per-step reward. `radii` are the acceptance radii of every level up to
/// and including the current one.
pub fn reward(obs: &Observation, radii: &[f64], cfg: &RewardConfig) -> f64 {
    cfg.c_v * obs.v_g + cfg.c_g * potential(obs) + cfg.c_g * obs.theta.cos() * range_bonus(obs.rho, radii)
}
