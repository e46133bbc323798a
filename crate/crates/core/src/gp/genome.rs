use serde::{Deserialize, Serialize};

use crate::analysis::measure_signal;
use crate::cpg::{simulate, validate_params, NetworkState, OscillatorParams, TonicInputs, N_OSC};
use crate::snake::{wrap_angle, CpgSnake, Goal, PhysicsParams, Pose};
use crate::{Error, Result};

pub const N_GENES: usize = 7;
pub const GENE_NAMES: [&str; N_GENES] = ["b", "tau_r", "tau_a", "a", "w_down", "w_up", "a_z"];

/// A candidate parameter vector, genes in [`GENE_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub genes: [f64; N_GENES],
}

impl Genome {
    pub fn from_params(p: &OscillatorParams) -> Self {
        Self {
            genes: [p.b, p.tau_r, p.tau_a, p.a, p.w_down, p.w_up, p.a_z],
        }
    }

    /// Parameters with the genes written over `base`; `K_f` and `c` come
    /// from `base`.
    pub fn decode(&self, base: &OscillatorParams) -> OscillatorParams {
        let g = self.genes;
        OscillatorParams {
            b: g[0],
            tau_r: g[1],
            tau_a: g[2],
            a: g[3],
            w_down: g[4],
            w_up: g[5],
            a_z: g[6],
            ..*base
        }
    }

    /// Whether the decoded parameters pass the field checks and the
    /// oscillation-existence inequality.
    pub fn is_feasible(&self, base: &OscillatorParams) -> bool {
        let p = self.decode(base);
        p.check().is_ok() && validate_params(&p).is_ok_and(|r| r.oscillation_possible)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneBounds {
    pub lo: [f64; N_GENES],
    pub hi: [f64; N_GENES],
}

impl Default for GeneBounds {
    fn default() -> Self {
        Self::around(&OscillatorParams::TABLE_I, 0.5)
    }
}

impl GeneBounds {
    /// `value * (1 -+ fraction)` around each gene of `p`.
    pub fn around(p: &OscillatorParams, fraction: f64) -> Self {
        let g = Genome::from_params(p).genes;
        Self {
            lo: g.map(|v| v * (1.0 - fraction)),
            hi: g.map(|v| v * (1.0 + fraction)),
        }
    }

    pub fn check(&self) -> Result<()> {
        for i in 0..N_GENES {
            if !(self.lo[i].is_finite() && self.hi[i].is_finite() && self.lo[i] <= self.hi[i]) {
                return Err(Error::Config(format!(
                    "bad bounds for {}: [{}, {}]",
                    GENE_NAMES[i], self.lo[i], self.hi[i]
                )));
            }
        }
        Ok(())
    }

    pub fn width(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn contains(&self, g: &Genome) -> bool {
        (0..N_GENES).all(|i| (self.lo[i]..=self.hi[i]).contains(&g.genes[i]))
    }

    pub fn clamp(&self, g: &mut Genome) {
        for i in 0..N_GENES {
            g.genes[i] = g.genes[i].clamp(self.lo[i], self.hi[i]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitnessConfig {
    /// Weight on the terminal speed toward the goal.
    pub a1: f64,
    /// Weight on the terminal heading error.
    pub a2: f64,
    /// Weight on the distance travelled toward the goal.
    pub a3: f64,
    /// Rollout length (s).
    pub horizon: f64,
    /// Distance of the goal placed on the initial heading (m).
    pub goal_distance: f64,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        Self {
            a1: 40.0,
            a2: 100.0,
            a3: 50.0,
            horizon: 6.4,
            goal_distance: 10.0,
        }
    }
}

impl FitnessConfig {
    /// `a1 |v_g| - a2 |theta_g| + a3 |d_g|`.
    pub fn score(&self, v_g: f64, theta_g: f64, d_g: f64) -> f64 {
        self.a1 * v_g.abs() - self.a2 * theta_g.abs() + self.a3 * d_g.abs()
    }

    pub fn check(&self) -> Result<()> {
        let ok = [self.a1, self.a2, self.a3, self.horizon, self.goal_distance]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("fitness weights and horizon must be > 0, got {self:?}")))
        }
    }
}

/// Terminal `(v_g, theta_g, d_g)` after driving the surrogate with unit
/// tonic inputs for `horizon` seconds toward a goal straight ahead.
///
/// `theta_g` is measured from the mean link orientation rather than the
/// centre-of-mass velocity, whose direction swings with every undulation.
fn terminal(p: &OscillatorParams, cfg: &FitnessConfig, phys: &PhysicsParams, horizon: f64) -> Result<(f64, f64, f64)> {
    let mut s = CpgSnake::new(*p, *phys, &Pose::default(), 0)?;
    let goal = Goal::new([cfg.goal_distance, 0.0], 0.01)?;
    let u = TonicInputs::uniform(1.0, 1.0);
    let steps = (horizon / s.integ.control_dt).round() as usize;
    let mut prev = s.observe(&goal, None);
    for _ in 0..steps {
        s.advance(&u)?;
        prev = s.observe(&goal, Some(&prev));
    }
    let body = crate::stats::mean(&s.robot.headings());
    let com = s.robot.com(phys);
    let to_goal = (goal.position[1] - com[1]).atan2(goal.position[0] - com[0]);
    Ok((prev.v_g, wrap_angle(to_goal - body), prev.d_g))
}

/// [`FitnessConfig::score`] at the end of the rollout, or `-inf` for
/// infeasible genomes and diverged rollouts.
pub fn fitness(g: &Genome, base: &OscillatorParams, cfg: &FitnessConfig, phys: &PhysicsParams) -> f64 {
    if !g.is_feasible(base) {
        return f64::NEG_INFINITY;
    }
    match terminal(&g.decode(base), cfg, phys, cfg.horizon) {
        Ok((v, th, d)) => cfg.score(v, th, d),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Signed travel toward a goal straight ahead after `horizon` seconds.
pub fn rollout_displacement(p: &OscillatorParams, phys: &PhysicsParams, horizon: f64) -> Result<f64> {
    let cfg = FitnessConfig::default();
    Ok(terminal(p, &cfg, phys, horizon)?.2)
}

/// Whether every link command settles on a limit cycle under unit tonic
/// inputs, judged on the second half of a `duration` second run.
pub fn oscillates(p: &OscillatorParams, duration: f64) -> Result<bool> {
    let dt = 1e-3;
    let tr = simulate(p, &TonicInputs::uniform(1.0, 1.0), duration, dt, &NetworkState::seeded())?;
    for i in 0..N_OSC {
        if !measure_signal(&tr.psi(i), dt, 0.5 * duration)?.is_limit_cycle {
            return Ok(false);
        }
    }
    Ok(true)
}
