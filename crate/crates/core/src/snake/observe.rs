use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::physics::PhysicsParams;
use super::robot::RobotState;
use super::N_LINKS;
use crate::{Error, Result};

/// Below this speed the heading stands in for the velocity direction.
const STILL_SPEED: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub position: [f64; 2],
    /// Acceptance radius (m).
    pub radius: f64,
}

impl Goal {
    pub fn new(position: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParams(format!("goal radius must be > 0, got {radius}")));
        }
        Ok(Self { position, radius })
    }

    pub fn mirrored(&self) -> Self {
        Self {
            position: [self.position[0], -self.position[1]],
            radius: self.radius,
        }
    }
}

/// Map an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a - TAU * (a / TAU).round();
    if w <= -PI {
        w + TAU
    } else if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Goal-relative feedback plus the auxiliary quantities used by rewards and
/// fitness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub rho: f64,
    pub rho_dot: f64,
    /// Counterclockwise angle from the velocity direction to the goal.
    pub theta: f64,
    pub theta_dot: f64,
    pub kappa: [f64; N_LINKS],
    /// Velocity component toward the goal (m/s).
    pub v_g: f64,
    /// Travel along the goal direction since reset (m).
    pub d_g: f64,
    /// COM velocity.
    pub velocity: [f64; 2],
    /// Unit vector from the head to the goal.
    pub goal_dir: [f64; 2],
}

impl Observation {
    pub fn features(&self) -> [f64; 4 + N_LINKS] {
        let mut s = [0.0; 4 + N_LINKS];
        s[..4].copy_from_slice(&[self.rho, self.rho_dot, self.theta, self.theta_dot]);
        s[4..].copy_from_slice(&self.kappa);
        s
    }

    pub fn speed(&self) -> f64 {
        self.velocity[0].hypot(self.velocity[1])
    }
}

/// Observe `st` relative to `g`. Rates are finite differences against
/// `prev`, taken `interval` seconds earlier; they are zero without one.
pub fn observe(
    st: &RobotState,
    g: &Goal,
    phys: &PhysicsParams,
    prev: Option<&Observation>,
    interval: f64,
) -> Observation {
    let head = st.head();
    let e = [g.position[0] - head[0], g.position[1] - head[1]];
    let rho = e[0].hypot(e[1]);
    let goal_dir = if rho > 0.0 {
        [e[0] / rho, e[1] / rho]
    } else {
        let h = st.heading();
        [h.cos(), h.sin()]
    };
    let velocity = st.com_velocity(phys);
    let speed = velocity[0].hypot(velocity[1]);
    let motion = if speed < STILL_SPEED {
        st.heading()
    } else {
        velocity[1].atan2(velocity[0])
    };
    let theta = wrap_angle(goal_dir[1].atan2(goal_dir[0]) - motion);

    let o = st.origin;
    let start = [g.position[0] - o[0], g.position[1] - o[1]];
    let start_len = start[0].hypot(start[1]);
    let travel_dir = if start_len > 0.0 {
        [start[0] / start_len, start[1] / start_len]
    } else {
        goal_dir
    };
    let d_g = (head[0] - o[0]) * travel_dir[0] + (head[1] - o[1]) * travel_dir[1];

    let (rho_dot, theta_dot) = match prev {
        Some(p) if interval > 0.0 => (
            (rho - p.rho) / interval,
            wrap_angle(theta - p.theta) / interval,
        ),
        _ => (0.0, 0.0),
    };
    Observation {
        rho,
        rho_dot,
        theta,
        theta_dot,
        kappa: st.curvatures(phys),
        v_g: velocity[0] * goal_dir[0] + velocity[1] * goal_dir[1],
        d_g,
        velocity,
        goal_dir,
    }
}
