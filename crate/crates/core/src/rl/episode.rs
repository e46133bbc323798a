use serde::{Deserialize, Serialize};

use crate::snake::{Observation, RolloutRow};
use crate::{Error, Result};

/// How a goal trial ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Success,
    Starved,
    MissedGoal,
    Timeout,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [Outcome::Success, Outcome::Starved, Outcome::MissedGoal, Outcome::Timeout];

    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Starved => "starved",
            Outcome::MissedGoal => "missed-goal",
            Outcome::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    /// Control steps before a trial times out.
    pub max_steps: usize,
    /// A trial is missed once `v_g < 0` for more than this many
    /// consecutive steps.
    pub missed_steps: usize,
    /// A trial starves once the speed stays below `starve_speed` for more
    /// than this many consecutive steps.
    pub starve_steps: usize,
    /// Speed floor for starvation (m/s).
    pub starve_speed: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            max_steps: 2000,
            missed_steps: 60,
            starve_steps: 60,
            starve_speed: 0.005,
        }
    }
}

impl EpisodeConfig {
    /// Starvation after a literal 60 ms, i.e. after the second slow step at
    /// a 50 ms control interval.
    pub fn literal_starvation(self, control_dt: f64) -> Self {
        Self {
            starve_steps: (0.06 / control_dt).floor() as usize,
            ..self
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.max_steps == 0 || !(self.starve_speed >= 0.0) {
            return Err(Error::Config(format!("invalid episode config {self:?}")));
        }
        Ok(())
    }
}

/// Step counters for one trial.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeClock {
    pub steps: usize,
    /// Consecutive steps with `v_g < 0`.
    pub receding: usize,
    /// Consecutive steps below the starvation speed.
    pub still: usize,
}

impl EpisodeClock {
    /// Count one control step ending in `obs`.
    pub fn tick(&mut self, obs: &Observation, cfg: &EpisodeConfig) {
        self.steps += 1;
        self.receding = if obs.v_g < 0.0 { self.receding + 1 } else { 0 };
        self.still = if obs.speed() < cfg.starve_speed { self.still + 1 } else { 0 };
    }
}

/// Terminal status after the latest tick, `None` while the trial runs.
/// Success is checked first, then the two failure cases, then the time
/// limit.
pub fn episode_status(obs: &Observation, radius: f64, clock: &EpisodeClock, cfg: &EpisodeConfig) -> Option<Outcome> {
    if obs.rho < radius {
        Some(Outcome::Success)
    } else if clock.still > cfg.starve_steps {
        Some(Outcome::Starved)
    } else if clock.receding > cfg.missed_steps {
        Some(Outcome::MissedGoal)
    } else if clock.steps >= cfg.max_steps {
        Some(Outcome::Timeout)
    } else {
        None
    }
}

/// One control step of a logged trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub row: RolloutRow,
    pub obs: Observation,
    /// Raw policy output before decoding.
    pub action: [f64; 4],
    /// Tonic extensor inputs actually applied (zeros without a CPG).
    pub u_e: [f64; 4],
    /// Index into the option set.
    pub option: usize,
    pub k_f: f64,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeLog {
    pub goal: [f64; 2],
    pub radius: f64,
    pub steps: Vec<StepRecord>,
    pub outcome: Outcome,
}

impl EpisodeLog {
    pub const CSV_HEADER: &'static str = "t,head_x,head_y,rho_g,theta_g,v_g,kappa1,kappa2,kappa3,kappa4,\
psi1,psi2,psi3,psi4,a1,a2,a3,a4,u_e1,u_e2,u_e3,u_e4,option,k_f,reward";

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    pub fn mean_v_g(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().map(|s| s.obs.v_g).sum::<f64>() / self.steps.len() as f64
    }

    pub fn csv_rows(&self) -> impl Iterator<Item = Vec<String>> + '_ {
        self.steps.iter().map(|s| {
            let mut f = s.row.csv_fields();
            f.extend(s.action.iter().chain(&s.u_e).map(|v| v.to_string()));
            f.push(s.option.to_string());
            f.push(s.k_f.to_string());
            f.push(s.reward.to_string());
            f
        })
    }
}
