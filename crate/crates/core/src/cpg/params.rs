use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Coefficients of the Matsuoka network.
///
/// Defaults are the GP-tuned configuration used throughout the crate
/// (`tau_r = 0.7696`, `tau_a = 1.7728`, `a = 2.0935`, `b = 10.0355`,
/// coupling weights `8.8669` / `0.7844`, `A_z = 4.6062`, `K_f = 1`, `c = 0`).
///
/// The strong weight sits on the tail-to-head edges. Inhibition received
/// from a neighbour makes the receiver lead it in phase, so this is the
/// placement that lets the head oscillator initiate the rhythm with the
/// body following in sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorParams {
    /// Discharge-rate time constant (s).
    pub tau_r: f64,
    /// Adaptation-rate time constant (s).
    pub tau_a: f64,
    /// Mutual inhibition between the extensor and flexor of one oscillator.
    pub a: f64,
    /// Self-inhibition weight.
    pub b: f64,
    /// Coupling from oscillator `i` onto its tail-side neighbour `i + 1`.
    pub w_down: f64,
    /// Coupling from oscillator `i + 1` back onto `i`.
    pub w_up: f64,
    /// Frequency ratio; multiplies both time constants.
    pub k_f: f64,
    /// Free-response tonic input added to every neuron.
    pub c: f64,
    /// Output amplification, `psi = A_z (z_e - z_f)`.
    pub a_z: f64,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        Self::TABLE_I
    }
}

impl OscillatorParams {
    pub const TABLE_I: OscillatorParams = OscillatorParams {
        tau_r: 0.7696,
        tau_a: 1.7728,
        a: 2.0935,
        b: 10.0355,
        w_down: 0.7844,
        w_up: 8.8669,
        k_f: 1.0,
        c: 0.0,
        a_z: 4.6062,
    };

    /// Single uncoupled oscillator with unit output gain, as used for the
    /// steering-bias studies.
    pub fn primitive(self) -> Self {
        Self {
            w_down: 0.0,
            w_up: 0.0,
            a_z: 1.0,
            ..self
        }
    }

    pub fn with_k_f(self, k_f: f64) -> Self {
        Self { k_f, ..self }
    }

    pub fn with_c(self, c: f64) -> Self {
        Self { c, ..self }
    }

    /// Mutual inhibition weight that yields harmonic gain `k_n` for the
    /// current time constants.
    pub fn with_harmonic_gain(self, k_n: f64) -> Self {
        Self {
            a: (self.tau_r + self.tau_a) / (self.tau_a * k_n),
            ..self
        }
    }

    /// Field-level invariants: positive time constants and `K_f`,
    /// non-negative `a`, `b`, `c`, everything finite.
    pub fn check(&self) -> Result<()> {
        let fields = [
            ("tau_r", self.tau_r),
            ("tau_a", self.tau_a),
            ("a", self.a),
            ("b", self.b),
            ("w_down", self.w_down),
            ("w_up", self.w_up),
            ("k_f", self.k_f),
            ("c", self.c),
            ("a_z", self.a_z),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} = {v} is not finite")));
        }
        for (name, v) in [("tau_r", self.tau_r), ("tau_a", self.tau_a), ("k_f", self.k_f)] {
            if v <= 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Both sides of the oscillation-existence inequality
/// `(tau_a - tau_r)^2 < 4 tau_r tau_a b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub oscillation_possible: bool,
}

pub fn validate_params(p: &OscillatorParams) -> Result<StabilityReport> {
    if !(p.tau_r > 0.0) || !(p.tau_a > 0.0) {
        return Err(Error::InvalidParams(format!(
            "time constants must be positive (tau_r = {}, tau_a = {})",
            p.tau_r, p.tau_a
        )));
    }
    let lhs = (p.tau_a - p.tau_r).powi(2);
    let rhs = 4.0 * p.tau_r * p.tau_a * p.b;
    Ok(StabilityReport {
        lhs,
        rhs,
        oscillation_possible: lhs < rhs,
    })
}
