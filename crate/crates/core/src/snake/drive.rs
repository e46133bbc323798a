use serde::Serialize;

use super::observe::{observe, Goal, Observation};
use super::physics::PhysicsParams;
use super::robot::{reset, step_robot, Pose, RobotState};
use crate::cpg::{step_network, CpgOutput, IntegrationConfig, NetworkState, OscillatorParams, TonicInputs};
use crate::Result;

/// A CPG network driving the robot, advanced one control interval at a
/// time with tonic inputs held constant over the interval.
#[derive(Debug, Clone)]
pub struct CpgSnake {
    pub cpg: OscillatorParams,
    pub phys: PhysicsParams,
    pub integ: IntegrationConfig,
    pub network: NetworkState,
    pub robot: RobotState,
    pub output: CpgOutput,
}

impl CpgSnake {
    pub fn new(cpg: OscillatorParams, phys: PhysicsParams, pose: &Pose, seed: u64) -> Result<Self> {
        cpg.check()?;
        Ok(Self {
            cpg,
            phys,
            integ: IntegrationConfig::default(),
            network: NetworkState::seeded(),
            robot: reset(&phys, pose, seed)?,
            output: CpgOutput::ZERO,
        })
    }

    /// Swap in a different parameter set without touching the state, used
    /// when an option changes `K_f`.
    pub fn set_cpg(&mut self, cpg: OscillatorParams) {
        self.cpg = cpg;
    }

    pub fn time(&self) -> f64 {
        self.robot.time
    }

    /// Integrate network and robot together for one control interval.
    pub fn advance(&mut self, tonic: &TonicInputs) -> Result<()> {
        let dt = self.integ.dt;
        for _ in 0..self.integ.substeps() {
            self.network = step_network(&self.network, tonic, &self.cpg, dt)?;
            self.output = self.network.output(&self.cpg);
            self.robot = step_robot(&self.robot, &self.output, &self.phys, dt)?;
        }
        Ok(())
    }

    /// Drive the robot with `psi` directly, bypassing the network.
    pub fn advance_direct(&mut self, psi: &CpgOutput) -> Result<()> {
        let dt = self.integ.dt;
        let psi = CpgOutput {
            psi: psi.psi.map(|v| v.clamp(-1.0, 1.0)),
        };
        for _ in 0..self.integ.substeps() {
            self.output = psi;
            self.robot = step_robot(&self.robot, &psi, &self.phys, dt)?;
        }
        Ok(())
    }

    pub fn observe(&self, goal: &Goal, prev: Option<&Observation>) -> Observation {
        observe(&self.robot, goal, &self.phys, prev, self.integ.control_dt)
    }

    pub fn log_row(&self, obs: &Observation) -> RolloutRow {
        RolloutRow {
            t: self.robot.time,
            head: self.robot.head(),
            rho: obs.rho,
            theta: obs.theta,
            v_g: obs.v_g,
            kappa: obs.kappa,
            psi: self.output.psi,
        }
    }
}

/// One line of a rollout log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RolloutRow {
    pub t: f64,
    pub head: [f64; 2],
    pub rho: f64,
    pub theta: f64,
    pub v_g: f64,
    pub kappa: [f64; 4],
    pub psi: [f64; 4],
}

impl RolloutRow {
    pub const CSV_HEADER: &'static str =
        "t,head_x,head_y,rho_g,theta_g,v_g,kappa1,kappa2,kappa3,kappa4,psi1,psi2,psi3,psi4";

    pub fn csv_fields(&self) -> Vec<String> {
        let mut v = vec![self.t, self.head[0], self.head[1], self.rho, self.theta, self.v_g];
        v.extend(self.kappa);
        v.extend(self.psi);
        v.iter().map(|x| x.to_string()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn travelling_wave_moves_toward_goal() {
        let goal = Goal::new([10.0, 0.0], 0.1).unwrap();
        let mut s = CpgSnake::new(
            OscillatorParams::TABLE_I,
            PhysicsParams::default(),
            &Pose::default(),
            0,
        )
        .unwrap();
        let u = TonicInputs::uniform(1.0, 1.0);
        let mut v_sum = 0.0;
        // the coupled network needs several periods to phase-lock
        for k in 0..600 {
            s.advance(&u).unwrap();
            if k >= 500 {
                v_sum += s.observe(&goal, None).v_g;
            }
        }
        let o = s.observe(&goal, None);
        assert!(v_sum / 100.0 > 0.0, "mean v_g {}", v_sum / 100.0);
        assert!(o.d_g > 0.0);
    }
}
