use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::curriculum::CurriculumLevel;
use super::domain::{randomize_domain, DomainRanges};
use super::episode::{episode_status, EpisodeClock, EpisodeConfig, Outcome};
use super::reward::{reward, RewardConfig};
use crate::cpg::{decode_action, CpgOutput, NetworkState, OscillatorParams, N_OSC};
use crate::snake::{CpgSnake, Goal, Observation, PhysicsParams, Pose};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub episode: EpisodeConfig,
    pub reward: RewardConfig,
    /// Redraw the randomised physics at the start of every trial.
    pub randomize: bool,
    pub ranges: DomainRanges,
    /// Non-randomised constants, and the physics used when randomisation
    /// is off.
    pub physics: PhysicsParams,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            episode: EpisodeConfig::default(),
            reward: RewardConfig::default(),
            randomize: true,
            ranges: DomainRanges::default(),
            physics: PhysicsParams::default(),
        }
    }
}

/// Result of one control step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub obs: Observation,
    pub reward: f64,
    pub outcome: Option<Outcome>,
    /// Extensor inputs applied over the step (zeros without a CPG).
    pub u_e: [f64; N_OSC],
}

/// One robot chasing a sequence of goals. The robot is never reset between
/// goals; only the goal, the trial counters and (optionally) the physics
/// change.
#[derive(Debug, Clone)]
pub struct SnakeEnv {
    pub snake: CpgSnake,
    pub goal: Goal,
    pub obs: Observation,
    pub clock: EpisodeClock,
    pub prev_action: [f64; N_OSC],
    radii: Vec<f64>,
    uses_cpg: bool,
    cfg: EnvConfig,
    pub rng: ChaCha8Rng,
}

impl SnakeEnv {
    /// `stream` separates the random streams of environments sharing a
    /// seed. With `mirrored` the robot starts in the reflected pose with a
    /// reflected network state.
    pub fn new(
        cpg: OscillatorParams,
        uses_cpg: bool,
        cfg: EnvConfig,
        pose: &Pose,
        mirrored: bool,
        seed: u64,
        stream: u64,
    ) -> Result<Self> {
        cfg.episode.check()?;
        cfg.reward.check()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let phys = if cfg.randomize {
            randomize_domain(&cfg.ranges, &cfg.physics, true, &mut rng)
        } else {
            cfg.physics
        };
        let pose = if mirrored { pose.mirrored() } else { *pose };
        let mut snake = CpgSnake::new(cpg, phys, &pose, seed)?;
        if mirrored {
            snake.network = NetworkState::seeded().mirrored();
        }
        let goal = Goal {
            position: snake.robot.head(),
            radius: 1.0,
        };
        let obs = snake.observe(&goal, None);
        Ok(Self {
            snake,
            goal,
            obs,
            clock: EpisodeClock::default(),
            prev_action: [0.0; N_OSC],
            radii: vec![goal.radius],
            uses_cpg,
            cfg,
            rng,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    /// Start a trial toward `goal`. `radii` are the acceptance radii of all
    /// levels up to the current one, the last being the goal's own.
    pub fn set_goal(&mut self, goal: Goal, radii: Vec<f64>) {
        if self.cfg.randomize {
            self.snake.phys = randomize_domain(&self.cfg.ranges, &self.cfg.physics, true, &mut self.rng);
        }
        self.goal = goal;
        self.radii = radii;
        self.clock = EpisodeClock::default();
        self.obs = self.snake.observe(&self.goal, None);
    }

    /// Start a trial with a goal drawn from `level` around the current pose.
    pub fn begin_trial(&mut self, level: &CurriculumLevel, radii: Vec<f64>) {
        let r = &self.snake.robot;
        let goal = level.sample_goal(r.head(), r.heading(), &mut self.rng);
        self.set_goal(goal, radii);
    }

    /// Apply `action` for one control interval with frequency ratio `k_f`.
    pub fn step(&mut self, action: &[f64; N_OSC], k_f: f64) -> Result<Transition> {
        let u_e = if self.uses_cpg {
            if self.snake.cpg.k_f != k_f {
                let p = self.snake.cpg.with_k_f(k_f);
                self.snake.set_cpg(p);
            }
            let u = decode_action(action);
            self.snake.advance(&u)?;
            u.u_e
        } else {
            self.snake.advance_direct(&CpgOutput { psi: *action })?;
            [0.0; N_OSC]
        };
        self.prev_action = *action;
        let obs = self.snake.observe(&self.goal, Some(&self.obs));
        self.obs = obs;
        self.clock.tick(&obs, &self.cfg.episode);
        Ok(Transition {
            obs,
            reward: reward(&obs, &self.radii, &self.cfg.reward),
            outcome: episode_status(&obs, self.goal.radius, &self.clock, &self.cfg.episode),
            u_e,
        })
    }
}
