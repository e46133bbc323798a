//! The four-oscillator Matsuoka chain.
//!
//! Each oscillator `i` is a mutually inhibiting extensor/flexor pair:
//!
//! ```text
//! K_f tau_r x_e' = -x_e - a z_f - b y_e - sum_j w_ji y_j^e + u_e + c
//! K_f tau_a y_e' =  z_e - y_e
//! ```
//!
//! and symmetrically for the flexor, with `z = max(0, x)`. Oscillator 0 sits
//! at the head and leads the rhythm. Neighbours inhibit each other through
//! their adaptation states on the same neuron type: the head-side neighbour
//! with weight `w_down`, the tail-side neighbour with `w_up`.

mod network;
mod params;
mod tonic;
mod trajectory;

use serde::{Deserialize, Serialize};

pub use network::{derivative, step_network, NetworkState};
pub(crate) use network::relu;
pub use params::{validate_params, OscillatorParams, StabilityReport};
pub use tonic::{decode_action, TonicInputs};
pub use trajectory::{advance, simulate, step_count, SquareWave, TonicSchedule, Trajectory};

/// Oscillators in the chain, one per actuated link.
pub const N_OSC: usize = 4;

/// Actuation command per link, nominally within `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CpgOutput {
    pub psi: [f64; N_OSC],
}

impl CpgOutput {
    pub const ZERO: CpgOutput = CpgOutput { psi: [0.0; N_OSC] };

    pub fn negated(&self) -> Self {
        Self {
            psi: self.psi.map(|v| -v),
        }
    }
}

/// Integration settings shared by everything that drives the network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationConfig {
    /// RK4 step (s).
    pub dt: f64,
    /// Interval over which tonic inputs are held constant (s).
    pub control_dt: f64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            control_dt: 0.05,
        }
    }
}

impl IntegrationConfig {
    pub fn substeps(&self) -> usize {
        ((self.control_dt / self.dt).round() as usize).max(1)
    }
}
