use std::f64::consts::TAU;

use serde::Serialize;

use crate::cpg::{relu, Trajectory};
use crate::{Error, Result};

/// Amplitude below which a signal counts as settled.
pub const AMPLITUDE_FLOOR: f64 = 1e-3;

/// Steady-state statistics of one signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalStats {
    /// Time average over an integer number of periods (whole window when
    /// not oscillating).
    pub bias: f64,
    /// Half peak-to-peak.
    pub amplitude: f64,
    /// Angular frequency from mean-crossing intervals (rad/s).
    pub frequency: Option<f64>,
    /// Fraction of time spent above the midline `(max + min) / 2`.
    pub duty: f64,
    pub is_limit_cycle: bool,
}

/// Which recorded series to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Psi(usize),
    /// `z_e - z_f` of one oscillator, i.e. `psi / A_z`.
    ZDiff(usize),
    Xe(usize),
    Xf(usize),
    /// Extensor tonic input.
    Ue(usize),
    /// `u_e - u_f`.
    UDiff(usize),
}

impl Channel {
    pub fn extract(&self, traj: &Trajectory) -> Vec<f64> {
        match *self {
            Channel::Psi(i) => traj.outputs.iter().map(|o| o.psi[i]).collect(),
            Channel::ZDiff(i) => traj
                .states
                .iter()
                .map(|s| relu(s.x_e[i]) - relu(s.x_f[i]))
                .collect(),
            Channel::Xe(i) => traj.states.iter().map(|s| s.x_e[i]).collect(),
            Channel::Xf(i) => traj.states.iter().map(|s| s.x_f[i]).collect(),
            Channel::Ue(i) => traj.inputs.iter().map(|u| u.u_e[i]).collect(),
            Channel::UDiff(i) => traj.inputs.iter().map(|u| u.u_e[i] - u.u_f[i]).collect(),
        }
    }
}

pub fn measure(traj: &Trajectory, channel: Channel, transient_cut: f64) -> Result<SignalStats> {
    measure_signal(&channel.extract(traj), traj.dt, transient_cut)
}

/// Measure a uniformly sampled signal after discarding `transient_cut`
/// seconds.
pub fn measure_signal(values: &[f64], dt: f64, transient_cut: f64) -> Result<SignalStats> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParams(format!("dt must be > 0, got {dt}")));
    }
    let start = ((transient_cut / dt).ceil() as usize).min(values.len());
    let w = &values[start..];
    if w.len() < 3 {
        return Err(Error::InvalidParams(format!(
            "only {} samples after the transient cut",
            w.len()
        )));
    }
    let (lo, hi) = min_max(w);
    let amplitude = 0.5 * (hi - lo);
    let midline = 0.5 * (hi + lo);
    let mean = w.iter().sum::<f64>() / w.len() as f64;

    let crossings = upward_crossings(w, mean);
    if crossings.len() < 2 || amplitude == 0.0 {
        return Ok(SignalStats {
            bias: mean,
            amplitude,
            frequency: None,
            duty: fraction_above(w, midline),
            is_limit_cycle: false,
        });
    }

    let first = crossings[0];
    let last = *crossings.last().unwrap();
    let periods = (crossings.len() - 1) as f64;
    let period = (last - first) * dt / periods;

    // whole periods between the first and last crossing sample
    let (k0, k1) = (first.ceil() as usize, last.ceil() as usize);
    let span = &w[k0..k1];
    let bias = span.iter().sum::<f64>() / span.len() as f64;
    let duty = fraction_above(span, midline);

    let n = w.len();
    let (mid_lo, mid_hi) = min_max(&w[n / 3..2 * n / 3]);
    let (end_lo, end_hi) = min_max(&w[2 * n / 3..]);
    let amp_mid = 0.5 * (mid_hi - mid_lo);
    let amp_end = 0.5 * (end_hi - end_lo);
    let is_limit_cycle = amp_end >= 0.9 * amp_mid && amp_end > AMPLITUDE_FLOOR && crossings.len() >= 3;

    Ok(SignalStats {
        bias,
        amplitude,
        frequency: Some(TAU / period),
        duty,
        is_limit_cycle,
    })
}

fn min_max(w: &[f64]) -> (f64, f64) {
    w.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn fraction_above(w: &[f64], level: f64) -> f64 {
    if w.is_empty() {
        return 0.0;
    }
    w.iter().filter(|&&v| v > level).count() as f64 / w.len() as f64
}

/// Fractional sample positions where the signal rises through `level`.
fn upward_crossings(w: &[f64], level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 1..w.len() {
        let (a, b) = (w[k - 1] - level, w[k] - level);
        if a < 0.0 && b >= 0.0 {
            out.push((k - 1) as f64 + a / (a - b));
        }
    }
    out
}
