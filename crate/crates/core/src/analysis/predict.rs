use serde::{Deserialize, Serialize};

use super::describing::harmonic_gain;
use crate::cpg::OscillatorParams;
use crate::{Error, Result};

/// Coefficients of the duty-cycle bias law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DutyFit {
    /// Slope of `L(r)` around `r = 0`; `1/2` to first order.
    pub k_m: f64,
    /// Amplitude-asymmetry offset between extensor and flexor.
    pub m: f64,
}

impl Default for DutyFit {
    fn default() -> Self {
        Self { k_m: 0.5, m: 0.0 }
    }
}

impl DutyFit {
    pub fn new(k_m: f64, m: f64) -> Result<Self> {
        if !(k_m > 0.0 && k_m < 1.0) {
            return Err(Error::InvalidParams(format!("K_m must lie in (0, 1), got {k_m}")));
        }
        Ok(Self { k_m, m })
    }
}

/// Output bias of a primitive oscillator (unit `A_z`) under constant
/// exclusive drive `u_e`, `u_f = 1 - u_e`:
/// `K_n (2 u_e - 1) / ((b - a) K_n + 1)`.
pub fn predict_bias_constant(u_e: f64, p: &OscillatorParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&u_e) {
        return Err(Error::InvalidParams(format!("u_e must lie in [0, 1], got {u_e}")));
    }
    let k_n = harmonic_gain(p)?;
    let denom = (p.b - p.a) * k_n + 1.0;
    if denom == 0.0 {
        return Err(Error::SingularDenominator("constant-input bias law"));
    }
    Ok(k_n * (2.0 * u_e - 1.0) / denom)
}

/// Output bias under exclusive pulse-wave drive with the given duty cycle:
/// `K_m (2 d - 1 - M (b - a)) / (K_m (b - a) + 1) + M`.
pub fn predict_bias_duty(duty: f64, fit: &DutyFit, p: &OscillatorParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&duty) {
        return Err(Error::InvalidParams(format!("duty must lie in [0, 1], got {duty}")));
    }
    let ba = p.b - p.a;
    let denom = fit.k_m * ba + 1.0;
    if denom == 0.0 {
        return Err(Error::SingularDenominator("duty-cycle bias law"));
    }
    Ok(fit.k_m * (2.0 * duty - 1.0 - fit.m * ba) / denom + fit.m)
}

/// Slope of [`predict_bias_duty`] with respect to the duty cycle.
pub fn duty_slope(fit: &DutyFit, p: &OscillatorParams) -> f64 {
    2.0 * fit.k_m / (fit.k_m * (p.b - p.a) + 1.0)
}
