//! Planar articulated snake surrogate.
//!
//! Five rigid bodies (head, three middle bodies, tail) joined by four soft
//! links. Each link bends under a torque proportional to its lagged
//! pressure, opposed by passive stiffness and damping. Wheels make ground
//! friction much larger sideways than along the body, which turns a
//! travelling bend wave into forward thrust.

mod drive;
mod observe;
mod physics;
mod robot;
mod sweep;

pub use drive::{CpgSnake, RolloutRow};
pub use observe::{observe, wrap_angle, Goal, Observation};
pub use physics::PhysicsParams;
pub use robot::{reset, step_robot, Pose, RobotState};
pub use sweep::{velocity_sweep, VelocityCell, VelocitySweep, VelocitySweepConfig};

pub const N_BODIES: usize = 5;
pub const N_LINKS: usize = N_BODIES - 1;
