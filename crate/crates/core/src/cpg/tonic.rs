use serde::{Deserialize, Serialize};

use super::N_OSC;

/// Extensor/flexor drive for every oscillator, in head-to-tail order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TonicInputs {
    pub u_e: [f64; N_OSC],
    pub u_f: [f64; N_OSC],
}

impl TonicInputs {
    pub const ZERO: TonicInputs = TonicInputs {
        u_e: [0.0; N_OSC],
        u_f: [0.0; N_OSC],
    };

    pub fn uniform(u_e: f64, u_f: f64) -> Self {
        Self {
            u_e: [u_e; N_OSC],
            u_f: [u_f; N_OSC],
        }
    }

    /// Exclusive pair on `[0, 1]`: `u_f = 1 - u_e` on every oscillator.
    pub fn exclusive(u_e: [f64; N_OSC]) -> Self {
        Self {
            u_e,
            u_f: u_e.map(|u| 1.0 - u),
        }
    }

    /// Swap extensor and flexor drive.
    pub fn mirrored(&self) -> Self {
        Self {
            u_e: self.u_f,
            u_f: self.u_e,
        }
    }

    /// The 8-vector `[u1e, u1f, u2e, u2f, ...]`.
    pub fn to_vector(&self) -> [f64; 2 * N_OSC] {
        let mut v = [0.0; 2 * N_OSC];
        for i in 0..N_OSC {
            v[2 * i] = self.u_e[i];
            v[2 * i + 1] = self.u_f[i];
        }
        v
    }

    /// Per-oscillator input difference `u_e - u_f`.
    pub fn difference(&self) -> [f64; N_OSC] {
        std::array::from_fn(|i| self.u_e[i] - self.u_f[i])
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Map an unconstrained action vector to exclusive tonic inputs through the
/// logistic function.
pub fn decode_action(action: &[f64; N_OSC]) -> TonicInputs {
    TonicInputs::exclusive(action.map(sigmoid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_action_is_balanced() {
        let u = decode_action(&[0.0; 4]);
        assert_eq!(u.u_e, [0.5; 4]);
        assert_eq!(u.u_f, [0.5; 4]);
    }

    #[test]
    fn ln3_gives_three_quarters() {
        let u = decode_action(&[3f64.ln(), 0.0, 0.0, 0.0]);
        assert!((u.u_e[0] - 0.75).abs() < 1e-15);
        assert!((u.u_f[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn saturates() {
        let u = decode_action(&[800.0, -800.0, 40.0, -40.0]);
        assert_eq!(u.u_e[0], 1.0);
        assert_eq!(u.u_f[0], 0.0);
        assert_eq!(u.u_e[1], 0.0);
        assert_eq!(u.u_f[1], 1.0);
        assert!(u.u_e[2] > 0.999_999 && u.u_e[2] <= 1.0);
    }

    #[test]
    fn vector_layout() {
        let u = TonicInputs::exclusive([0.1, 0.2, 0.3, 0.4]);
        let v = u.to_vector();
        assert_eq!(v[0], 0.1);
        assert_eq!(v[1], 0.9);
        assert_eq!(v[6], 0.4);
    }

    proptest! {
        #[test]
        fn exclusive_and_bounded(a in prop::array::uniform4(-50.0f64..50.0)) {
            let u = decode_action(&a);
            for i in 0..4 {
                prop_assert!((0.0..=1.0).contains(&u.u_e[i]));
                prop_assert!((0.0..=1.0).contains(&u.u_f[i]));
                prop_assert_eq!(u.u_e[i] + u.u_f[i], 1.0);
            }
        }

        #[test]
        fn monotone(x in -30.0f64..30.0, dx in 1e-3f64..5.0) {
            let lo = decode_action(&[x; 4]).u_e[0];
            let hi = decode_action(&[x + dx; 4]).u_e[0];
            prop_assert!(hi >= lo);
        }
    }
}
