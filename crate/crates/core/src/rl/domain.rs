use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::snake::PhysicsParams;

/// Inclusive sampling range of one randomised quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub low: f64,
    pub high: f64,
}

impl Range {
    pub const fn new(low: f64, high: f64) -> Self {
        Self { low, high }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.low + self.high)
    }

    pub fn contains(&self, v: f64) -> bool {
        (self.low..=self.high).contains(&v)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.random_range(self.low..=self.high)
    }
}

/// Ranges of the domain-randomised physical parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainRanges {
    pub ground_friction: Range,
    pub wheel_friction: Range,
    /// Each middle rigid body (kg).
    pub body_mass: Range,
    pub tail_mass: Range,
    pub head_mass: Range,
    /// psi.
    pub max_pressure: Range,
    /// rad.
    pub gravity_angle: Range,
}

pub const TABLE_III: DomainRanges = DomainRanges {
    ground_friction: Range::new(0.1, 1.5),
    wheel_friction: Range::new(0.05, 0.10),
    body_mass: Range::new(0.035, 0.075),
    tail_mass: Range::new(0.065, 0.085),
    head_mass: Range::new(0.075, 0.125),
    max_pressure: Range::new(5.0, 12.0),
    gravity_angle: Range::new(-0.001, 0.001),
};

impl Default for DomainRanges {
    fn default() -> Self {
        TABLE_III
    }
}

impl DomainRanges {
    fn fields(&self) -> [Range; 7] {
        [
            self.ground_friction,
            self.wheel_friction,
            self.body_mass,
            self.tail_mass,
            self.head_mass,
            self.max_pressure,
            self.gravity_angle,
        ]
    }

    fn with_values(base: &PhysicsParams, v: [f64; 7]) -> PhysicsParams {
        PhysicsParams {
            ground_friction: v[0],
            wheel_friction: v[1],
            body_mass: v[2],
            tail_mass: v[3],
            head_mass: v[4],
            max_pressure: v[5],
            gravity_angle: v[6],
            ..*base
        }
    }

    /// `base` with every randomised field drawn uniformly from its range.
    pub fn sample<R: Rng + ?Sized>(&self, base: &PhysicsParams, rng: &mut R) -> PhysicsParams {
        Self::with_values(base, self.fields().map(|r| r.sample(rng)))
    }

    /// `base` with every randomised field at its range midpoint.
    pub fn midpoints(&self, base: &PhysicsParams) -> PhysicsParams {
        Self::with_values(base, self.fields().map(|r| r.mid()))
    }

    pub fn contains(&self, p: &PhysicsParams) -> bool {
        let v = [
            p.ground_friction,
            p.wheel_friction,
            p.body_mass,
            p.tail_mass,
            p.head_mass,
            p.max_pressure,
            p.gravity_angle,
        ];
        self.fields().iter().zip(v).all(|(r, x)| r.contains(x))
    }
}

/// Draw a physics configuration, or the range midpoints when `enabled` is
/// false. The non-randomised constants come from `base`.
pub fn randomize_domain<R: Rng + ?Sized>(
    ranges: &DomainRanges,
    base: &PhysicsParams,
    enabled: bool,
    rng: &mut R,
) -> PhysicsParams {
    if enabled {
        ranges.sample(base, rng)
    } else {
        ranges.midpoints(base)
    }
}
