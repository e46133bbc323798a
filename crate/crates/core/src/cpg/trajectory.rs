use std::io::Write;

use serde::Serialize;

use super::network::rk4;
use super::{CpgOutput, NetworkState, OscillatorParams, TonicInputs, N_OSC};
use crate::{Error, Result};

/// Time-varying tonic drive.
pub trait TonicSchedule {
    fn at(&self, t: f64) -> TonicInputs;
}

impl TonicSchedule for TonicInputs {
    fn at(&self, _t: f64) -> TonicInputs {
        *self
    }
}

impl<F: Fn(f64) -> TonicInputs> TonicSchedule for F {
    fn at(&self, t: f64) -> TonicInputs {
        self(t)
    }
}

/// Exclusive square-wave drive: `u_e = high` for the first `duty` fraction of
/// every period, `low` otherwise, and `u_f = 1 - u_e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquareWave {
    pub period: f64,
    pub duty: f64,
    pub high: f64,
    pub low: f64,
}

impl SquareWave {
    pub fn new(period: f64, duty: f64) -> Self {
        Self {
            period,
            duty,
            high: 1.0,
            low: 0.0,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let phase = (t / self.period).rem_euclid(1.0);
        if phase < self.duty {
            self.high
        } else {
            self.low
        }
    }
}

impl TonicSchedule for SquareWave {
    fn at(&self, t: f64) -> TonicInputs {
        TonicInputs::exclusive([self.value(t); N_OSC])
    }
}

/// Uniformly sampled simulation record.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub time: Vec<f64>,
    pub states: Vec<NetworkState>,
    pub inputs: Vec<TonicInputs>,
    pub outputs: Vec<CpgOutput>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn psi(&self, i: usize) -> Vec<f64> {
        self.outputs.iter().map(|o| o.psi[i]).collect()
    }

    pub fn last_state(&self) -> &NetworkState {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub const CSV_HEADER: &'static str = "t,x_e1,x_e2,x_e3,x_e4,x_f1,x_f2,x_f3,x_f4,\
y_e1,y_e2,y_e3,y_e4,y_f1,y_f2,y_f3,y_f4,\
u_e1,u_e2,u_e3,u_e4,u_f1,u_f2,u_f3,u_f4,psi1,psi2,psi3,psi4";

    /// Writes the header row and one row per sample. Comment lines, if any,
    /// are the caller's business.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for k in 0..self.len() {
            write!(w, "{}", self.time[k])?;
            for v in self.states[k].iter() {
                write!(w, ",{v}")?;
            }
            for v in self.inputs[k].u_e.iter().chain(&self.inputs[k].u_f) {
                write!(w, ",{v}")?;
            }
            for v in &self.outputs[k].psi {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Number of integration steps covering `duration`.
pub fn step_count(duration: f64, dt: f64) -> usize {
    (duration / dt).round() as usize
}

/// Integrate the network from `ics` over `duration` seconds.
///
/// The schedule is sampled at the start of each step and held for the step.
/// Sample `k` sits at `t = k * dt`.
pub fn simulate<S: TonicSchedule + ?Sized>(
    p: &OscillatorParams,
    schedule: &S,
    duration: f64,
    dt: f64,
    ics: &NetworkState,
) -> Result<Trajectory> {
    p.check()?;
    if !(dt > 0.0) || !(duration >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "need dt > 0 and duration >= 0 (dt = {dt}, duration = {duration})"
        )));
    }
    let n = step_count(duration, dt);
    let mut traj = Trajectory {
        dt,
        time: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
        inputs: Vec::with_capacity(n + 1),
        outputs: Vec::with_capacity(n + 1),
    };
    let mut s = *ics;
    for k in 0..=n {
        let t = k as f64 * dt;
        let u = schedule.at(t);
        traj.time.push(t);
        traj.states.push(s);
        traj.inputs.push(u);
        traj.outputs.push(s.output(p));
        if k < n {
            s = rk4(&s, &u, p, dt);
            if !s.is_finite() {
                return Err(Error::IntegrationDiverged {
                    step: k + 1,
                    time: (k + 1) as f64 * dt,
                });
            }
        }
    }
    Ok(traj)
}

/// Integrate without recording, returning the final state.
pub fn advance<S: TonicSchedule + ?Sized>(
    p: &OscillatorParams,
    schedule: &S,
    t0: f64,
    steps: usize,
    dt: f64,
    s: &NetworkState,
) -> Result<NetworkState> {
    let mut s = *s;
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        s = rk4(&s, &schedule.at(t), p, dt);
        if !s.is_finite() {
            return Err(Error::IntegrationDiverged { step: k + 1, time: t + dt });
        }
    }
    Ok(s)
}
