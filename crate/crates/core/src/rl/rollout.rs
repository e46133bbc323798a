use serde::{Deserialize, Serialize};

use super::env::{EnvConfig, SnakeEnv};
use super::episode::{EpisodeConfig, EpisodeLog, StepRecord};
use super::policy::Policy;
use crate::cpg::N_OSC;
use crate::snake::{Goal, PhysicsParams, Pose};
use crate::stats::{linear_fit, mean};
use crate::{Error, Result};

/// Way-points relative to the start pose: `x` along the initial heading,
/// `y` to its left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GoalScript {
    /// One goal `distance` metres away, `angle` degrees left of the heading.
    Single { distance: f64, angle: f64 },
    /// Goals alternating left and right of the initial heading line.
    Zigzag { legs: usize, leg_length: f64, offset: f64 },
    /// The four corners of a square turned counterclockwise.
    Square { side: f64 },
    Waypoints { points: Vec<[f64; 2]> },
}

impl GoalScript {
    pub fn points(&self) -> Vec<[f64; 2]> {
        match self {
            GoalScript::Single { distance, angle } => {
                let a = angle.to_radians();
                vec![[distance * a.cos(), distance * a.sin()]]
            }
            GoalScript::Zigzag { legs, leg_length, offset } => (1..=*legs)
                .map(|k| {
                    let side = if k % 2 == 1 { 1.0 } else { -1.0 };
                    [k as f64 * leg_length, side * offset]
                })
                .collect(),
            GoalScript::Square { side } => vec![[*side, 0.0], [*side, *side], [0.0, *side], [0.0, 0.0]],
            GoalScript::Waypoints { points } => points.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RolloutConfig {
    pub script: GoalScript,
    /// Acceptance radius of every goal (m).
    pub radius: f64,
    pub seed: u64,
    /// Reflect the start pose, network state and goals about the heading
    /// axis.
    pub mirrored: bool,
    /// Sample actions and option switches instead of acting greedily.
    pub stochastic: bool,
    pub episode: EpisodeConfig,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        Self {
            script: GoalScript::Single {
                distance: 1.5,
                angle: 0.0,
            },
            radius: 0.2,
            seed: 0,
            mirrored: false,
            stochastic: false,
            episode: EpisodeConfig::default(),
        }
    }
}

/// A policy driving one robot through a goal sequence.
struct Driver<'a> {
    policy: &'a Policy,
    env: SnakeEnv,
    option: Option<usize>,
    stochastic: bool,
}

impl<'a> Driver<'a> {
    fn new(policy: &'a Policy, phys: &PhysicsParams, episode: EpisodeConfig, mirrored: bool, seed: u64, stochastic: bool) -> Result<Self> {
        let cfg = EnvConfig {
            episode,
            randomize: false,
            physics: *phys,
            ..Default::default()
        };
        let first = policy.fixed_option.unwrap_or(policy.n_options() - 1);
        let env = SnakeEnv::new(policy.cpg_for(first), policy.variant.uses_cpg(), cfg, &Pose::default(), mirrored, seed, 0)?;
        Ok(Self {
            policy,
            env,
            option: None,
            stochastic,
        })
    }

    fn step(&mut self) -> Result<(StepRecord, Option<super::episode::Outcome>)> {
        let p = self.policy;
        let x = p.state(&self.env.obs, &self.env.prev_action);
        let d = if self.stochastic {
            p.decide(&x, self.option, Some(&mut self.env.rng))
        } else {
            p.decide::<rand_chacha::ChaCha8Rng>(&x, self.option, None)
        };
        self.option = Some(d.option);
        let k_f = p.options[d.option];
        let tr = self.env.step(&d.action, k_f)?;
        let rec = StepRecord {
            row: self.env.snake.log_row(&tr.obs),
            obs: tr.obs,
            action: d.action,
            u_e: tr.u_e,
            option: d.option,
            k_f,
            reward: tr.reward,
        };
        Ok((rec, tr.outcome))
    }
}

/// Run `policy` through the script, one trial per way-point. The robot
/// carries on to the next way-point whatever the outcome.
pub fn rollout(policy: &Policy, phys: &PhysicsParams, cfg: &RolloutConfig) -> Result<Vec<EpisodeLog>> {
    if !(cfg.radius > 0.0) {
        return Err(Error::Config(format!("goal radius must be > 0, got {}", cfg.radius)));
    }
    let mut d = Driver::new(policy, phys, cfg.episode, cfg.mirrored, cfg.seed, cfg.stochastic)?;
    let mut logs = Vec::new();
    for p in cfg.script.points() {
        let mut goal = Goal::new(p, cfg.radius)?;
        if cfg.mirrored {
            goal = goal.mirrored();
        }
        d.env.set_goal(goal, vec![cfg.radius]);
        let mut steps = Vec::new();
        let outcome = loop {
            let (rec, out) = d.step()?;
            steps.push(rec);
            if let Some(o) = out {
                break o;
            }
        };
        logs.push(EpisodeLog {
            goal: goal.position,
            radius: cfg.radius,
            steps,
            outcome,
        });
    }
    Ok(logs)
}

/// Mean link command and mean tonic difference of the head oscillator while
/// heading for a goal at one angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteeringPoint {
    /// Goal angle left of the initial heading (deg).
    pub angle: f64,
    /// Time average of `psi_1`.
    pub bias_psi: f64,
    /// Time average of `u_e1 - u_f1`.
    pub bias_u: f64,
}

impl SteeringPoint {
    pub const CSV_HEADER: &'static str = "angle,bias_psi1,bias_u1";

    pub fn csv_fields(&self) -> Vec<String> {
        vec![self.angle.to_string(), self.bias_psi.to_string(), self.bias_u.to_string()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteeringConfig {
    pub distance: f64,
    /// Control steps averaged per goal; trials are not cut short.
    pub steps: usize,
}

impl Default for SteeringConfig {
    fn default() -> Self {
        Self { distance: 1.5, steps: 200 }
    }
}

/// Bias of the head link command and of its tonic input for goals at each
/// angle, starting from rest every time. Needs a CPG variant.
///
/// Each angle is run from both mirror images of the network's initial
/// state and the two biases averaged, so the arbitrary side of the start-up
/// kick does not favour turns to one side.
pub fn steering_study(policy: &Policy, phys: &PhysicsParams, angles: &[f64], cfg: &SteeringConfig) -> Result<Vec<SteeringPoint>> {
    if !policy.variant.uses_cpg() {
        return Err(Error::Config("steering study needs a CPG variant".into()));
    }
    let episode = EpisodeConfig {
        max_steps: usize::MAX,
        missed_steps: usize::MAX,
        starve_steps: usize::MAX,
        ..Default::default()
    };
    let run = |angle: f64, flipped: bool| -> Result<(f64, f64)> {
        // the default pose is its own mirror image, so only the network flips
        let mut d = Driver::new(policy, phys, episode, flipped, 0, false)?;
        let a = angle.to_radians();
        // tiny radius so the trial never ends inside the window
        let goal = Goal::new([cfg.distance * a.cos(), cfg.distance * a.sin()], 1e-9)?;
        d.env.set_goal(goal, vec![goal.radius]);
        let (mut psi, mut du) = (Vec::with_capacity(cfg.steps), Vec::with_capacity(cfg.steps));
        for _ in 0..cfg.steps {
            let (rec, _) = d.step()?;
            psi.push(rec.row.psi[0]);
            du.push(2.0 * rec.u_e[0] - 1.0);
        }
        Ok((mean(&psi), mean(&du)))
    };
    angles
        .iter()
        .map(|&angle| {
            let (p0, u0) = run(angle, false)?;
            let (p1, u1) = run(angle, true)?;
            Ok(SteeringPoint {
                angle,
                bias_psi: 0.5 * (p0 + p1),
                bias_u: 0.5 * (u0 + u1),
            })
        })
        .collect()
}

/// Whether `bias_psi` is strictly monotone in angle (either direction), and
/// the R^2 of `bias_psi` regressed on `bias_u`.
pub fn steering_summary(points: &[SteeringPoint]) -> (bool, Option<f64>) {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    let up = p.windows(2).all(|w| w[1].bias_psi > w[0].bias_psi);
    let down = p.windows(2).all(|w| w[1].bias_psi < w[0].bias_psi);
    let x: Vec<f64> = p.iter().map(|s| s.bias_u).collect();
    let y: Vec<f64> = p.iter().map(|s| s.bias_psi).collect();
    (up || down, linear_fit(&x, &y).map(|f| f.r_squared))
}

/// Half peak-to-peak of each extensor input over a trial, averaged over
/// the oscillators.
pub fn tonic_amplitude(log: &EpisodeLog) -> f64 {
    let amps: Vec<f64> = (0..N_OSC)
        .map(|i| {
            let (lo, hi) = log
                .steps
                .iter()
                .map(|s| s.u_e[i])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            0.5 * (hi - lo)
        })
        .collect();
    mean(&amps)
}
