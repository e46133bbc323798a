use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Physical constants of the snake surrogate.
///
/// The first seven fields are the domain-randomised quantities; their
/// defaults are the midpoints of the randomisation ranges. The rest are
/// fixed surrogate constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsParams {
    /// Lateral (sideways-sliding) friction coefficient.
    pub ground_friction: f64,
    /// Rolling friction of the wheels along the body axis.
    pub wheel_friction: f64,
    /// Mass of each of the three middle rigid bodies (kg).
    pub body_mass: f64,
    pub tail_mass: f64,
    pub head_mass: f64,
    /// Maximum link pressure (psi).
    pub max_pressure: f64,
    /// Tilt of the ground plane about the world y axis (rad).
    pub gravity_angle: f64,

    /// Pressure response time constant (s).
    pub actuator_lag: f64,
    /// Rest length of each soft link (m).
    pub link_length: f64,
    /// Length of each rigid body (m).
    pub body_length: f64,
    /// Bending torque per unit pressure (N m / psi).
    pub torque_gain: f64,
    /// Passive bending stiffness of a soft link (N m / rad).
    pub link_stiffness: f64,
    /// Passive bending damping of a soft link (N m s / rad).
    pub link_damping: f64,
    /// Lateral friction is at least this multiple of the wheel friction.
    pub min_anisotropy: f64,
    /// Velocity scale of the smoothed Coulomb law (m/s).
    pub slip_velocity: f64,
    /// Sliding speed at which the viscous part of the friction equals the
    /// Coulomb part (m/s).
    pub drag_velocity: f64,
    pub gravity: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            ground_friction: 0.8,
            wheel_friction: 0.075,
            body_mass: 0.055,
            tail_mass: 0.075,
            head_mass: 0.1,
            max_pressure: 8.5,
            gravity_angle: 0.0,
            actuator_lag: 0.15,
            link_length: 0.09,
            body_length: 0.04,
            torque_gain: 0.19,
            link_stiffness: 1.0,
            link_damping: 1.0,
            min_anisotropy: 5.0,
            slip_velocity: 0.01,
            drag_velocity: 0.03,
            gravity: 9.81,
        }
    }
}

impl PhysicsParams {
    pub fn check(&self) -> Result<()> {
        let positive = [
            ("body_mass", self.body_mass),
            ("tail_mass", self.tail_mass),
            ("head_mass", self.head_mass),
            ("max_pressure", self.max_pressure),
            ("actuator_lag", self.actuator_lag),
            ("link_length", self.link_length),
            ("body_length", self.body_length),
            ("slip_velocity", self.slip_velocity),
            ("drag_velocity", self.drag_velocity),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        let non_negative = [
            ("ground_friction", self.ground_friction),
            ("wheel_friction", self.wheel_friction),
            ("torque_gain", self.torque_gain),
            ("link_stiffness", self.link_stiffness),
            ("link_damping", self.link_damping),
            ("min_anisotropy", self.min_anisotropy),
            ("gravity", self.gravity),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !self.gravity_angle.is_finite() {
            return Err(Error::InvalidParams("gravity_angle must be finite".into()));
        }
        Ok(())
    }

    /// Masses head to tail.
    pub fn masses(&self) -> [f64; super::N_BODIES] {
        [
            self.head_mass,
            self.body_mass,
            self.body_mass,
            self.body_mass,
            self.tail_mass,
        ]
    }

    /// Distance between neighbouring body centres.
    pub fn pitch(&self) -> f64 {
        self.body_length + self.link_length
    }

    pub fn tangential_friction(&self) -> f64 {
        self.wheel_friction
    }

    pub fn lateral_friction(&self) -> f64 {
        self.ground_friction.max(self.min_anisotropy * self.wheel_friction)
    }
}
