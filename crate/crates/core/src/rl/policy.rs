use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use crate::cpg::{decode_action, OscillatorParams, TonicInputs, N_OSC};
use crate::snake::Observation;
use crate::{Error, Result};

/// Observation features fed to every head.
pub const N_FEATURES: usize = 8;
/// Features plus the previous action.
pub const N_STATE: usize = N_FEATURES + N_OSC;

/// Which controller is trained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Tonic-input actions with no free-response input (`c = 0`).
    PpocCpg,
    /// Tonic-input actions with the free-response input fixed at `c = 0.75`.
    FocPpocCpg,
    /// Link commands straight from the policy, no oscillator network.
    VanillaPpo,
}

impl Variant {
    pub fn c(&self) -> f64 {
        match self {
            Variant::FocPpocCpg => 0.75,
            _ => 0.0,
        }
    }

    pub fn uses_cpg(&self) -> bool {
        !matches!(self, Variant::VanillaPpo)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ppoc-cpg" => Ok(Variant::PpocCpg),
            "foc-ppoc-cpg" => Ok(Variant::FocPpocCpg),
            "vanilla-ppo" => Ok(Variant::VanillaPpo),
            _ => Err(Error::Config(format!(
                "unknown variant {s:?} (expected ppoc-cpg, foc-ppoc-cpg or vanilla-ppo)"
            ))),
        }
    }
}

/// Per-feature running root-mean-square used to scale observations.
///
/// There is no centring, so a sign flip of a feature flips its normalised
/// value exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningRms {
    pub count: f64,
    pub mean_sq: [f64; N_FEATURES],
}

impl Default for RunningRms {
    fn default() -> Self {
        Self {
            count: 0.0,
            mean_sq: [1.0; N_FEATURES],
        }
    }
}

impl RunningRms {
    pub fn update(&mut self, x: &[f64; N_FEATURES]) {
        self.count += 1.0;
        let w = 1.0 / self.count;
        for (m, v) in self.mean_sq.iter_mut().zip(x) {
            *m += w * (v * v - *m);
        }
    }

    pub fn merge(&mut self, other: &RunningRms) {
        let n = self.count + other.count;
        if other.count == 0.0 {
            return;
        }
        for (m, o) in self.mean_sq.iter_mut().zip(&other.mean_sq) {
            *m = (*m * self.count + o * other.count) / n;
        }
        self.count = n;
    }

    pub fn normalize(&self, x: &[f64; N_FEATURES]) -> [f64; N_FEATURES] {
        std::array::from_fn(|i| (x[i] / (self.mean_sq[i].sqrt() + 1e-8)).clamp(-10.0, 10.0))
    }
}

/// Reflection of a state vector about the heading axis: goal angle, its
/// rate, curvatures and previous action change sign; distance terms do not.
pub fn mirror_state(x: &[f64; N_STATE]) -> [f64; N_STATE] {
    std::array::from_fn(|i| if i < 2 { x[i] } else { -x[i] })
}

/// Network input for the actor: state plus a one-hot option.
fn with_option(x: &[f64], option: usize, n_options: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(x.len() + n_options);
    v.extend_from_slice(x);
    v.extend((0..n_options).map(|k| if k == option { 1.0 } else { 0.0 }));
    v
}

/// Option-critic policy over tonic inputs and `K_f` options.
///
/// Every head is symmetrised under the mirror map `M`: the action mean is
/// `(g(s) - g(Ms)) / 2` and the value, option and termination outputs are
/// `(h(s) + h(Ms)) / 2`, so a mirrored situation gets the mirrored command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub variant: Variant,
    /// `K_f` value of each option.
    pub options: Vec<f64>,
    /// Oscillator parameters the options scale; `c` is set by the variant.
    pub cpg: OscillatorParams,
    /// Intra-option policy mean, input state plus one-hot option.
    pub actor: Mlp,
    pub log_std: [f64; N_OSC],
    /// Option values `Q(s, y)` for every option.
    pub critic: Mlp,
    /// Option-selection logits.
    pub selector: Mlp,
    /// Termination logits for every option.
    pub termination: Mlp,
    pub normalizer: RunningRms,
    /// While set, this option is always active and never terminates.
    pub fixed_option: Option<usize>,
}

/// Deterministic outputs of every head at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Heads {
    pub q: Vec<f64>,
    pub select_probs: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Heads {
    /// Option-selection-weighted value.
    pub fn value(&self) -> f64 {
        self.q.iter().zip(&self.select_probs).map(|(q, p)| q * p).sum()
    }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn symmetric(net: &Mlp, x: &[f64; N_STATE]) -> Vec<f64> {
    let a = net.forward(x);
    let b = net.forward(&mirror_state(x));
    a.iter().zip(&b).map(|(a, b)| 0.5 * (a + b)).collect()
}

impl Policy {
    pub fn new<R: Rng + ?Sized>(
        variant: Variant,
        options: Vec<f64>,
        cpg: OscillatorParams,
        hidden: &[usize],
        init_log_std: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if options.is_empty() || options.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(Error::Config(format!("option set must be non-empty and positive, got {options:?}")));
        }
        if hidden.is_empty() || hidden.contains(&0) {
            return Err(Error::Config(format!("invalid hidden layer sizes {hidden:?}")));
        }
        let n = options.len();
        let sizes = |i: usize, o: usize| {
            let mut s = vec![i];
            s.extend_from_slice(hidden);
            s.push(o);
            s
        };
        Ok(Self {
            variant,
            cpg: cpg.with_c(variant.c()),
            actor: Mlp::new(&sizes(N_STATE + n, N_OSC), 0.01, rng),
            log_std: [init_log_std; N_OSC],
            critic: Mlp::new(&sizes(N_STATE, n), 1.0, rng),
            selector: Mlp::new(&sizes(N_STATE, n), 0.01, rng),
            termination: Mlp::new(&sizes(N_STATE, n), 0.01, rng),
            normalizer: RunningRms::default(),
            fixed_option: None,
            options,
        })
    }

    pub fn n_options(&self) -> usize {
        self.options.len()
    }

    pub fn is_finite(&self) -> bool {
        self.actor.is_finite()
            && self.critic.is_finite()
            && self.selector.is_finite()
            && self.termination.is_finite()
            && self.log_std.iter().all(|v| v.is_finite())
    }

    /// Index of the option closest to `k_f`.
    pub fn option_index(&self, k_f: f64) -> usize {
        let mut best = 0;
        for (i, k) in self.options.iter().enumerate() {
            if (k - k_f).abs() < (self.options[best] - k_f).abs() {
                best = i;
            }
        }
        best
    }

    /// Normalised state vector from an observation and the previous action.
    pub fn state(&self, obs: &Observation, prev_action: &[f64; N_OSC]) -> [f64; N_STATE] {
        let f = self.normalizer.normalize(&obs.features());
        let mut x = [0.0; N_STATE];
        x[..N_FEATURES].copy_from_slice(&f);
        for (i, a) in prev_action.iter().enumerate() {
            // previous actions are bounded so squash them to (-1, 1)
            x[N_FEATURES + i] = (a / 3.0).tanh();
        }
        x
    }

    pub fn mean_action(&self, x: &[f64; N_STATE], option: usize) -> [f64; N_OSC] {
        let n = self.n_options();
        let a = self.actor.forward(&with_option(x, option, n));
        let b = self.actor.forward(&with_option(&mirror_state(x), option, n));
        std::array::from_fn(|i| 0.5 * (a[i] - b[i]))
    }

    pub fn heads(&self, x: &[f64; N_STATE]) -> Heads {
        Heads {
            q: symmetric(&self.critic, x),
            select_probs: softmax(&symmetric(&self.selector, x)),
            beta: symmetric(&self.termination, x).into_iter().map(sigmoid).collect(),
        }
    }

    /// Gaussian sample around the mean action.
    pub fn sample_action<R: Rng + ?Sized>(&self, mean: &[f64; N_OSC], rng: &mut R) -> [f64; N_OSC] {
        std::array::from_fn(|i| {
            let e: f64 = StandardNormal.sample(rng);
            mean[i] + self.log_std[i].exp() * e
        })
    }

    pub fn log_prob(&self, mean: &[f64; N_OSC], action: &[f64; N_OSC]) -> f64 {
        (0..N_OSC)
            .map(|i| {
                let s = self.log_std[i].exp();
                let z = (action[i] - mean[i]) / s;
                -0.5 * z * z - self.log_std[i] - 0.5 * (2.0 * PI).ln()
            })
            .sum()
    }

    /// Oscillator parameters for option `option`.
    pub fn cpg_for(&self, option: usize) -> OscillatorParams {
        self.cpg.with_k_f(self.options[option])
    }

    /// Tonic inputs for an action of the CPG variants.
    pub fn tonic(&self, action: &[f64; N_OSC]) -> TonicInputs {
        decode_action(action)
    }

    /// Choose the option and action at state `x`. `prev` is the option
    /// active before this step, `None` at the very first step. With `rng`
    /// absent the choice is deterministic: the most likely option, a
    /// termination when `beta > 0.5` and the mean action.
    pub fn decide<R: Rng + ?Sized>(&self, x: &[f64; N_STATE], prev: Option<usize>, mut rng: Option<&mut R>) -> Decision {
        let heads = self.heads(x);
        let (option, selected) = match (self.fixed_option, prev) {
            (Some(o), _) => (o, false),
            (None, Some(p)) => {
                let stop = match rng.as_deref_mut() {
                    Some(r) => r.random::<f64>() < heads.beta[p],
                    None => heads.beta[p] > 0.5,
                };
                if stop {
                    (pick(&heads.select_probs, rng.as_deref_mut()), true)
                } else {
                    (p, false)
                }
            }
            (None, None) => (pick(&heads.select_probs, rng.as_deref_mut()), true),
        };
        let mean = self.mean_action(x, option);
        let action = match rng {
            Some(r) => self.sample_action(&mean, r),
            None => mean,
        };
        Decision {
            log_prob: self.log_prob(&mean, &action),
            heads,
            option,
            prev,
            selected,
            mean,
            action,
        }
    }
}

fn pick<R: Rng + ?Sized>(probs: &[f64], rng: Option<&mut R>) -> usize {
    match rng {
        Some(r) => {
            let u: f64 = r.random();
            let mut acc = 0.0;
            for (i, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    return i;
                }
            }
            probs.len() - 1
        }
        None => {
            let mut best = 0;
            for (i, p) in probs.iter().enumerate() {
                if *p > probs[best] {
                    best = i;
                }
            }
            best
        }
    }
}

/// Everything chosen at one step, with the head outputs it was based on.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub heads: Heads,
    pub option: usize,
    /// Option active before this step.
    pub prev: Option<usize>,
    /// True when a new option was drawn at this step.
    pub selected: bool,
    pub mean: [f64; N_OSC],
    pub action: [f64; N_OSC],
    pub log_prob: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn policy() -> Policy {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut p = Policy::new(
            Variant::FocPpocCpg,
            vec![0.5, 0.7, 0.85, 1.0],
            OscillatorParams::TABLE_I,
            &[16, 16],
            -0.5,
            &mut rng,
        )
        .unwrap();
        // push the output layers away from zero so the checks bite
        for net in [&mut p.actor, &mut p.critic, &mut p.selector, &mut p.termination] {
            for v in net.params.iter_mut() {
                *v += rng.random_range(-0.3..0.3);
            }
        }
        p
    }

    #[test]
    fn mirrored_state_gets_mirrored_heads() {
        let p = policy();
        let x: [f64; N_STATE] = std::array::from_fn(|i| (i as f64 * 0.37).sin());
        let m = mirror_state(&x);
        for o in 0..4 {
            let a = p.mean_action(&x, o);
            let b = p.mean_action(&m, o);
            for i in 0..4 {
                assert_eq!(a[i], -b[i]);
            }
        }
        assert_eq!(p.heads(&x), p.heads(&m));
        assert!(p.mean_action(&x, 0).iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn foc_sets_c() {
        assert_eq!(policy().cpg.c, 0.75);
        assert_eq!(policy().cpg_for(1).k_f, 0.7);
        assert_eq!(policy().option_index(0.9), 2);
    }

    #[test]
    fn rms_scales_without_centring() {
        let mut r = RunningRms::default();
        for k in 0..100 {
            let s = if k % 2 == 0 { 2.0 } else { -2.0 };
            r.update(&[s; N_FEATURES]);
        }
        let n = r.normalize(&[2.0; N_FEATURES]);
        assert!((n[0] - 1.0).abs() < 1e-6);
        assert_eq!(r.normalize(&[-2.0; N_FEATURES])[3], -n[3]);
    }

    #[test]
    fn log_prob_peaks_at_mean() {
        let p = policy();
        let m = [0.1, -0.2, 0.3, 0.0];
        let mut off = m;
        off[2] += 0.5;
        assert!(p.log_prob(&m, &m) > p.log_prob(&m, &off));
    }

    #[test]
    fn empty_option_set_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(Policy::new(Variant::PpocCpg, vec![], OscillatorParams::TABLE_I, &[8], 0.0, &mut rng).is_err());
    }
}
