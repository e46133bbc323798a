use serde::{Deserialize, Serialize};

use super::{CpgOutput, OscillatorParams, TonicInputs, N_OSC};
use crate::{Error, Result};

/// The sixteen neuron states of the chain, oscillator 0 at the head.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NetworkState {
    pub x_e: [f64; N_OSC],
    pub y_e: [f64; N_OSC],
    pub x_f: [f64; N_OSC],
    pub y_f: [f64; N_OSC],
}

impl NetworkState {
    pub const ZERO: NetworkState = NetworkState {
        x_e: [0.0; N_OSC],
        y_e: [0.0; N_OSC],
        x_f: [0.0; N_OSC],
        y_f: [0.0; N_OSC],
    };

    /// Zero state with a small kick on the head extensor so the network
    /// leaves the fixed point at the origin.
    pub fn seeded() -> Self {
        let mut s = Self::ZERO;
        s.x_e[0] = 0.01;
        s
    }

    /// Extensor/flexor swap.
    pub fn mirrored(&self) -> Self {
        Self {
            x_e: self.x_f,
            y_e: self.y_f,
            x_f: self.x_e,
            y_f: self.y_e,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(f64::is_finite)
    }

    /// States in CSV column order: all `x_e`, `x_f`, `y_e`, `y_f`.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.x_e
            .iter()
            .chain(&self.x_f)
            .chain(&self.y_e)
            .chain(&self.y_f)
            .copied()
    }

    pub fn output(&self, p: &OscillatorParams) -> CpgOutput {
        CpgOutput {
            psi: std::array::from_fn(|i| p.a_z * (relu(self.x_e[i]) - relu(self.x_f[i]))),
        }
    }

    fn axpy(&self, h: f64, d: &NetworkState) -> NetworkState {
        let f = |s: &[f64; N_OSC], d: &[f64; N_OSC]| -> [f64; N_OSC] {
            std::array::from_fn(|i| s[i] + h * d[i])
        };
        NetworkState {
            x_e: f(&self.x_e, &d.x_e),
            y_e: f(&self.y_e, &d.y_e),
            x_f: f(&self.x_f, &d.x_f),
            y_f: f(&self.y_f, &d.y_f),
        }
    }
}

#[inline]
pub(crate) fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Inhibition received by oscillator `i` from its chain neighbours.
#[inline]
fn coupling(y: &[f64; N_OSC], i: usize, p: &OscillatorParams) -> f64 {
    let mut s = 0.0;
    if i > 0 {
        s += p.w_down * y[i - 1];
    }
    if i + 1 < N_OSC {
        s += p.w_up * y[i + 1];
    }
    s
}

/// Right-hand side of the network ODE.
pub fn derivative(s: &NetworkState, u: &TonicInputs, p: &OscillatorParams) -> NetworkState {
    let tr = p.k_f * p.tau_r;
    let ta = p.k_f * p.tau_a;
    let mut d = NetworkState::ZERO;
    for i in 0..N_OSC {
        let z_e = relu(s.x_e[i]);
        let z_f = relu(s.x_f[i]);
        d.x_e[i] =
            (-s.x_e[i] - p.a * z_f - p.b * s.y_e[i] - coupling(&s.y_e, i, p) + u.u_e[i] + p.c) / tr;
        d.y_e[i] = (z_e - s.y_e[i]) / ta;
        d.x_f[i] =
            (-s.x_f[i] - p.a * z_e - p.b * s.y_f[i] - coupling(&s.y_f, i, p) + u.u_f[i] + p.c) / tr;
        d.y_f[i] = (z_f - s.y_f[i]) / ta;
    }
    d
}

/// One classical RK4 step with the tonic input held over the step.
///
/// Returns [`Error::IntegrationDiverged`] tagged with step index 0; the
/// batch driver rewrites the index.
pub fn step_network(
    s: &NetworkState,
    u: &TonicInputs,
    p: &OscillatorParams,
    dt: f64,
) -> Result<NetworkState> {
    let next = rk4(s, u, p, dt);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::IntegrationDiverged { step: 0, time: dt })
    }
}

pub(crate) fn rk4(s: &NetworkState, u: &TonicInputs, p: &OscillatorParams, dt: f64) -> NetworkState {
    let k1 = derivative(s, u, p);
    let k2 = derivative(&s.axpy(0.5 * dt, &k1), u, p);
    let k3 = derivative(&s.axpy(0.5 * dt, &k2), u, p);
    let k4 = derivative(&s.axpy(dt, &k3), u, p);
    let mut sum = k1.axpy(2.0, &k2);
    sum = sum.axpy(2.0, &k3);
    sum = sum.axpy(1.0, &k4);
    s.axpy(dt / 6.0, &sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_fixed_point_without_drive() {
        let p = OscillatorParams::TABLE_I.with_c(0.0);
        let d = derivative(&NetworkState::ZERO, &TonicInputs::ZERO, &p);
        assert!(d.iter().all(|v| v == 0.0));
        let mut s = NetworkState::ZERO;
        for _ in 0..1000 {
            s = step_network(&s, &TonicInputs::ZERO, &p, 1e-3).unwrap();
        }
        assert_eq!(s, NetworkState::ZERO);
    }

    #[test]
    fn chain_coupling_edges() {
        // Only oscillator 1's y_e is non-zero: it must inhibit 0 with w_up
        // and 2 with w_down, nobody else.
        let p = OscillatorParams {
            c: 0.0,
            ..OscillatorParams::TABLE_I
        };
        let mut s = NetworkState::ZERO;
        s.y_e[1] = 1.0;
        let d = derivative(&s, &TonicInputs::ZERO, &p);
        let tr = p.tau_r;
        assert!((d.x_e[0] + p.w_up / tr).abs() < 1e-15);
        assert!((d.x_e[2] + p.w_down / tr).abs() < 1e-15);
        assert_eq!(d.x_e[3], 0.0);
        assert!((d.x_e[1] + p.b / tr).abs() < 1e-15);
        assert!(d.x_f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rk4_matches_linear_decay() {
        // With x < 0 everywhere the y equations are pure decay y' = -y/tau_a.
        let p = OscillatorParams {
            w_down: 0.0,
            w_up: 0.0,
            a: 0.0,
            b: 0.0,
            c: 0.0,
            ..OscillatorParams::TABLE_I
        };
        let mut s = NetworkState::ZERO;
        s.y_e = [1.0; 4];
        s.x_e = [-5.0; 4];
        let dt = 1e-2;
        for _ in 0..100 {
            s = step_network(&s, &TonicInputs::ZERO, &p, dt).unwrap();
        }
        let exact = (-1.0 / p.tau_a).exp();
        assert!((s.y_e[0] - exact).abs() < 1e-9);
    }

    #[test]
    fn divergence_is_reported() {
        let p = OscillatorParams::TABLE_I;
        let mut s = NetworkState::ZERO;
        s.x_e[0] = f64::INFINITY;
        assert!(matches!(
            step_network(&s, &TonicInputs::ZERO, &p, 1e-3),
            Err(Error::IntegrationDiverged { .. })
        ));
    }
}
