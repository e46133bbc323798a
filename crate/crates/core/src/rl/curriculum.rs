use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::snake::Goal;
use crate::{Error, Result};

/// One task level: goals are drawn uniformly from a fan in front of the
/// robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurriculumLevel {
    pub level: usize,
    /// Distance range (m).
    pub rho_lo: f64,
    pub rho_hi: f64,
    /// Turning-angle range relative to the heading (deg, CCW positive).
    pub angle_lo: f64,
    pub angle_hi: f64,
    /// Acceptance radius (m).
    pub radius: f64,
    /// Success fraction needed for promotion.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Number of trials the success fraction is taken over.
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_sigma() -> f64 {
    0.9
}

fn default_window() -> usize {
    100
}

const fn row(level: usize, rho_lo: f64, angle_lo: f64, angle_hi: f64, radius: f64) -> CurriculumLevel {
    CurriculumLevel {
        level,
        rho_lo,
        rho_hi: 1.5,
        angle_lo,
        angle_hi,
        radius,
        sigma: 0.9,
        window: 100,
    }
}

/// The twelve-level training curriculum.
pub const TABLE_II: [CurriculumLevel; 12] = [
    row(1, 1.2, -10.0, 10.0, 0.5),
    row(2, 1.2, -10.0, 10.0, 0.4),
    row(3, 1.2, -15.0, 15.0, 0.3),
    row(4, 1.2, -20.0, 20.0, 0.25),
    row(5, 1.2, -30.0, 30.0, 0.2),
    row(6, 1.0, -40.0, 40.0, 0.18),
    row(7, 1.0, -45.0, 45.0, 0.15),
    row(8, 1.0, -50.0, 50.0, 0.12),
    row(9, 0.9, -60.0, 60.0, 0.09),
    row(10, 0.9, -60.0, 70.0, 0.06),
    row(11, 0.9, -70.0, 70.0, 0.05),
    row(12, 0.8, -80.0, 80.0, 0.05),
];

impl CurriculumLevel {
    pub fn check(&self) -> Result<()> {
        let ok = self.rho_lo > 0.0
            && self.rho_hi >= self.rho_lo
            && self.angle_hi >= self.angle_lo
            && self.angle_lo >= -180.0
            && self.angle_hi <= 180.0
            && self.radius > 0.0
            && (0.0..=1.0).contains(&self.sigma)
            && self.window > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid curriculum level {self:?}")))
        }
    }

    /// Largest turning angle on either side (deg).
    pub fn max_turn(&self) -> f64 {
        self.angle_lo.abs().max(self.angle_hi.abs())
    }

    /// Goal uniform in area over the fan in front of `head` facing
    /// `heading`.
    pub fn sample_goal<R: Rng + ?Sized>(&self, head: [f64; 2], heading: f64, rng: &mut R) -> Goal {
        let (r2_lo, r2_hi) = (self.rho_lo * self.rho_lo, self.rho_hi * self.rho_hi);
        // area element is r dr, so r^2 is uniform
        let rho = if r2_hi > r2_lo {
            rng.random_range(r2_lo..=r2_hi).sqrt()
        } else {
            self.rho_lo
        };
        let angle = if self.angle_hi > self.angle_lo {
            rng.random_range(self.angle_lo..=self.angle_hi)
        } else {
            self.angle_lo
        };
        let phi = heading + angle * PI / 180.0;
        Goal {
            position: [head[0] + rho * phi.cos(), head[1] + rho * phi.sin()],
            radius: self.radius,
        }
    }
}

/// Violations of the level-to-level ordering rules; empty when the table is
/// consistent. Comparisons are non-strict since the shipped table repeats
/// some values between neighbouring levels.
pub fn monotonicity_violations(levels: &[CurriculumLevel]) -> Vec<String> {
    let mut out = Vec::new();
    for w in levels.windows(2) {
        let (p, c) = (&w[0], &w[1]);
        if c.level != p.level + 1 {
            out.push(format!("level {}: index does not follow {}", c.level, p.level));
        }
        if c.radius > p.radius {
            out.push(format!("level {}: radius grows", c.level));
        }
        if c.angle_lo > p.angle_lo || c.angle_hi < p.angle_hi {
            out.push(format!("level {}: turning range shrinks", c.level));
        }
        if c.rho_hi < p.rho_hi {
            out.push(format!("level {}: upper distance shrinks", c.level));
        }
        if c.rho_hi - c.rho_lo > p.rho_hi - p.rho_lo + 1e-12 {
            out.push(format!("level {}: distance band widens", c.level));
        }
    }
    out
}

/// Tracks the current level and the success window used for promotion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Curriculum {
    pub levels: Vec<CurriculumLevel>,
    pub index: usize,
    recent: VecDeque<bool>,
    /// Set once the last level's promotion criterion is met.
    pub completed: bool,
}

impl Curriculum {
    pub fn new(levels: Vec<CurriculumLevel>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Config("curriculum has no levels".into()));
        }
        for l in &levels {
            l.check()?;
        }
        Ok(Self {
            levels,
            index: 0,
            recent: VecDeque::new(),
            completed: false,
        })
    }

    pub fn table_ii() -> Self {
        Self::new(TABLE_II.to_vec()).expect("shipped table is valid")
    }

    pub fn current(&self) -> &CurriculumLevel {
        &self.levels[self.index]
    }

    /// Acceptance radii of every level up to the current one.
    pub fn radii(&self) -> Vec<f64> {
        self.levels[..=self.index].iter().map(|l| l.radius).collect()
    }

    /// Success fraction over the current window (0 when empty).
    pub fn success_rate(&self) -> f64 {
        if self.recent.is_empty() {
            return 0.0;
        }
        self.recent.iter().filter(|&&s| s).count() as f64 / self.recent.len() as f64
    }

    /// Record one trial; returns true when it triggered a promotion.
    pub fn record(&mut self, success: bool) -> bool {
        let lvl = *self.current();
        self.recent.push_back(success);
        while self.recent.len() > lvl.window {
            self.recent.pop_front();
        }
        if self.recent.len() == lvl.window && self.success_rate() >= lvl.sigma {
            if self.index + 1 < self.levels.len() {
                self.index += 1;
                self.recent.clear();
                return true;
            }
            self.completed = true;
        }
        false
    }
}
