//! Describing-function predictions and the measurements that test them.

mod describing;
mod measure;
mod predict;
pub mod sweeps;

use serde::Serialize;

pub use describing::{
    entrainment_threshold, free_amplitude, gate_fourier_k, gate_fourier_k_inv, gate_fourier_l,
    harmonic_gain, natural_frequency, natural_frequency_swapped,
};
pub use measure::{measure, measure_signal, Channel, SignalStats, AMPLITUDE_FLOOR};
pub use predict::{duty_slope, predict_bias_constant, predict_bias_duty, DutyFit};

/// Result of evaluating the entrainment threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Threshold {
    Value(f64),
    /// Forcing exactly at the natural frequency; the threshold's limit is 0.
    Singular { omega: f64 },
}

impl Threshold {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Threshold::Value(v) => Some(v),
            Threshold::Singular { .. } => None,
        }
    }

    /// The value, or its limit at the singular point.
    pub fn limit(&self) -> f64 {
        self.value().unwrap_or(0.0)
    }
}
