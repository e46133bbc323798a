//! Describing-function quantities of the rectifier `g(x) = max(0, x)` and the
//! closed forms built on them.
//!
//! For `x(t) = A (cos t + r)` the rectified output is approximated by
//! `A (K(r) cos t + L(r))`: `K` is the first-harmonic gain and `L` the DC
//! term.

use std::f64::consts::{FRAC_1_PI, PI};

use super::Threshold;
use crate::cpg::OscillatorParams;
use crate::{Error, Result};

/// First-harmonic gain of the rectifier at bias ratio `r`.
pub fn gate_fourier_k(r: f64) -> f64 {
    if r < -1.0 {
        0.0
    } else if r > 1.0 {
        1.0
    } else {
        FRAC_1_PI * (r * (1.0 - r * r).sqrt() - r.acos()) + 1.0
    }
}

/// DC term of the rectifier at bias ratio `r`.
pub fn gate_fourier_l(r: f64) -> f64 {
    if r < -1.0 {
        0.0
    } else if r > 1.0 {
        r
    } else {
        FRAC_1_PI * ((1.0 - r * r).sqrt() - r * r.acos()) + r
    }
}

/// Inverse of [`gate_fourier_k`] on `[-1, 1]` by bisection.
///
/// `K` is strictly increasing there, from 0 to 1, so any target in the
/// open interval has exactly one preimage.
pub fn gate_fourier_k_inv(target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::NoRoot { target });
    }
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if gate_fourier_k(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `K_n = (tau_r + tau_a) / (tau_a a)`, the gain at which the linearised
/// oscillator loses its damping.
pub fn harmonic_gain(p: &OscillatorParams) -> Result<f64> {
    if p.a == 0.0 {
        return Err(Error::UndefinedGain);
    }
    Ok((p.tau_r + p.tau_a) / (p.tau_a * p.a))
}

/// Free-response angular frequency (rad/s),
/// `(1 / (tau_r K_f)) sqrt((tau_r + tau_a) b / (tau_a a) - 1)`.
pub fn natural_frequency(p: &OscillatorParams) -> Result<f64> {
    let radicand = harmonic_gain(p)? * p.b - 1.0;
    if !(radicand > 0.0) {
        return Err(Error::NoNaturalFrequency { radicand });
    }
    Ok(radicand.sqrt() / (p.tau_r * p.k_f))
}

/// The alternative expression with the roles of the two time constants
/// swapped, `(1 / tau_a) sqrt((tau_a + tau_r) b / (tau_r a) - 1)`.
///
/// Kept for comparison only; it does not feed the entrainment threshold and
/// carries no `K_f` factor.
pub fn natural_frequency_swapped(p: &OscillatorParams) -> Result<f64> {
    if p.a == 0.0 {
        return Err(Error::UndefinedGain);
    }
    let radicand = (p.tau_a + p.tau_r) * p.b / (p.tau_r * p.a) - 1.0;
    if !(radicand > 0.0) {
        return Err(Error::NoNaturalFrequency { radicand });
    }
    Ok(radicand.sqrt() / p.tau_a)
}

/// Approximate free-response amplitude
/// `A_n = c / (r_n + (a + b) L(r_n))` with `r_n = K^{-1}(K_n)`.
pub fn free_amplitude(p: &OscillatorParams) -> Result<f64> {
    let r_n = gate_fourier_k_inv(harmonic_gain(p)?)?;
    let denom = r_n + (p.a + p.b) * gate_fourier_l(r_n);
    if denom == 0.0 {
        return Err(Error::SingularDenominator("free-response amplitude"));
    }
    Ok(p.c / denom)
}

/// Entrainment threshold `A_0(omega)`: the forced tonic amplitude needed
/// before a periodic input at `omega` takes over the output.
///
/// Returns [`Threshold::Singular`] when `omega` equals the natural frequency
/// (the threshold tends to zero there) and `Value(0.0)` whenever `c = 0`.
pub fn entrainment_threshold(omega: f64, p: &OscillatorParams) -> Result<Threshold> {
    if p.c < 0.0 {
        return Err(Error::InvalidParams(format!("c must be >= 0, got {}", p.c)));
    }
    if p.c == 0.0 {
        return Ok(Threshold::Value(0.0));
    }
    let omega_n = natural_frequency(p)?;
    let gap = (omega * omega - omega_n * omega_n).abs();
    if gap == 0.0 {
        return Ok(Threshold::Singular { omega });
    }
    let a_n = free_amplitude(p)?;
    let gain = 0.5 * (p.tau_r * p.tau_r * omega * omega + 1.0).sqrt() / (p.tau_r * p.tau_a * gap);
    Ok(Threshold::Value(p.c / (gain * p.c / a_n + 1.0 / PI)))
}
