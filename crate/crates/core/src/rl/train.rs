use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checkpoint::{PolicyCheckpoint, TrainingMeta};
use super::curriculum::{Curriculum, CurriculumLevel, TABLE_II};
use super::env::{EnvConfig, SnakeEnv};
use super::episode::Outcome;
use super::mlp::{clip_grad_norm, Adam};
use super::policy::{mirror_state, softmax, Heads, Policy, Variant, N_FEATURES, N_STATE};
use crate::cpg::{OscillatorParams, N_OSC};
use crate::snake::Pose;
use crate::{Error, Result};

/// When the option heads start learning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnfreezeRule {
    /// Unfreeze once neither the level nor the smoothed step reward has
    /// improved for this many updates (0 disables).
    pub plateau_updates: usize,
    /// Unfreeze unconditionally after this many updates.
    pub after_updates: Option<usize>,
}

impl Default for UnfreezeRule {
    fn default() -> Self {
        Self {
            plateau_updates: 50,
            after_updates: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub variant: Variant,
    pub seed: u64,
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip: f64,
    pub epochs: usize,
    pub minibatch: usize,
    /// Parallel robots feeding each update.
    pub n_envs: usize,
    /// Control steps each robot contributes per update.
    pub steps_per_env: usize,
    pub init_log_std: f64,
    pub min_log_std: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub max_grad_norm: f64,
    /// `K_f` of every option.
    pub options: Vec<f64>,
    /// Option used while the option heads are frozen.
    pub frozen_k_f: f64,
    pub unfreeze: UnfreezeRule,
    /// Added to the termination advantage so options are not dropped for
    /// marginal gains.
    pub termination_margin: f64,
    pub option_entropy_coef: f64,
    pub max_episodes: usize,
    /// No limit when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_updates: Option<usize>,
    /// Write a checkpoint every this many updates (0 disables).
    pub checkpoint_every: usize,
    pub cpg: OscillatorParams,
    pub env: EnvConfig,
    pub curriculum: Vec<CurriculumLevel>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            variant: Variant::FocPpocCpg,
            seed: 0,
            hidden: vec![128, 128],
            learning_rate: 5e-4,
            gamma: 0.99,
            gae_lambda: 0.95,
            clip: 0.2,
            epochs: 8,
            minibatch: 256,
            n_envs: 4,
            steps_per_env: 512,
            init_log_std: -0.5,
            min_log_std: -2.5,
            entropy_coef: 0.0,
            value_coef: 0.5,
            max_grad_norm: 0.5,
            options: vec![0.5, 0.7, 0.85, 1.0],
            frozen_k_f: 1.0,
            unfreeze: UnfreezeRule::default(),
            termination_margin: 0.01,
            option_entropy_coef: 0.01,
            max_episodes: 12_500,
            max_updates: None,
            checkpoint_every: 10,
            cpg: OscillatorParams::TABLE_I,
            env: EnvConfig::default(),
            curriculum: TABLE_II.to_vec(),
        }
    }
}

impl TrainConfig {
    /// Desk-scale run: the first two curriculum levels, a small network and
    /// a short promotion window.
    pub fn smoke() -> Self {
        let mut levels = TABLE_II[..2].to_vec();
        for l in &mut levels {
            l.sigma = 0.8;
            l.window = 20;
        }
        Self {
            hidden: vec![32, 32],
            n_envs: 4,
            steps_per_env: 256,
            minibatch: 128,
            max_episodes: 2000,
            curriculum: levels,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden layer sizes must be non-empty and positive");
        }
        if !(self.learning_rate > 0.0) || !(0.0..=1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("learning_rate must be > 0 and gamma, gae_lambda in [0, 1]");
        }
        if self.n_envs == 0 || self.steps_per_env == 0 || self.minibatch == 0 || self.epochs == 0 {
            return bad("n_envs, steps_per_env, minibatch and epochs must be > 0");
        }
        if self.options.is_empty() || self.options.iter().any(|k| !(*k > 0.0)) {
            return bad("options must be a non-empty set of positive K_f values");
        }
        if self.curriculum.is_empty() {
            return bad("curriculum has no levels");
        }
        self.cpg.check()?;
        self.env.episode.check()?;
        self.env.reward.check()?;
        self.env.physics.check()?;
        Ok(())
    }
}

/// One line of the metrics stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpdateMetrics {
    pub update: usize,
    pub episodes: usize,
    /// Level number being trained after this update.
    pub level: usize,
    pub success_rate: f64,
    /// Mean return of the trials finished during this update.
    pub mean_reward: Option<f64>,
    pub mean_step_reward: f64,
    pub success: usize,
    pub starved: usize,
    pub missed_goal: usize,
    pub timeout: usize,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub mean_log_std: f64,
    pub options_frozen: bool,
    pub mean_k_f: f64,
    pub promoted: bool,
}

struct Worker {
    env: SnakeEnv,
    option: Option<usize>,
    ep_reward: f64,
}

struct Sample {
    x: [f64; N_STATE],
    option: usize,
    prev: Option<usize>,
    selected: bool,
    action: [f64; N_OSC],
    log_prob: f64,
    heads: Heads,
    reward: f64,
    done: bool,
    advantage: f64,
    ret: f64,
}

struct Batch {
    samples: Vec<Sample>,
    finished: Vec<(Outcome, f64)>,
    features: Vec<[f64; N_FEATURES]>,
    k_f_sum: f64,
}

/// Value of carrying `option` into state `heads`: it terminates with
/// probability `beta` and is replaced according to the selector.
fn continuation(heads: &Heads, option: usize, frozen: bool) -> f64 {
    if frozen {
        heads.q[option]
    } else {
        let b = heads.beta[option];
        (1.0 - b) * heads.q[option] + b * heads.value()
    }
}

fn collect(
    w: &mut Worker,
    policy: &Policy,
    level: &CurriculumLevel,
    radii: &[f64],
    steps: usize,
    gamma: f64,
    lambda: f64,
) -> Result<Batch> {
    let frozen = policy.fixed_option.is_some();
    let mut b = Batch {
        samples: Vec::with_capacity(steps),
        finished: Vec::new(),
        features: Vec::with_capacity(steps),
        k_f_sum: 0.0,
    };
    for _ in 0..steps {
        let x = policy.state(&w.env.obs, &w.env.prev_action);
        b.features.push(w.env.obs.features());
        let d = policy.decide(&x, w.option, Some(&mut w.env.rng));
        w.option = Some(d.option);
        let k_f = policy.options[d.option];
        b.k_f_sum += k_f;
        let tr = w.env.step(&d.action, k_f)?;
        w.ep_reward += tr.reward;
        if let Some(o) = tr.outcome {
            b.finished.push((o, w.ep_reward));
            w.ep_reward = 0.0;
            w.env.begin_trial(level, radii.to_vec());
        }
        b.samples.push(Sample {
            x,
            option: d.option,
            prev: d.prev,
            selected: d.selected,
            action: d.action,
            log_prob: d.log_prob,
            heads: d.heads,
            reward: tr.reward,
            done: tr.outcome.is_some(),
            advantage: 0.0,
            ret: 0.0,
        });
    }
    let last = policy.heads(&policy.state(&w.env.obs, &w.env.prev_action));
    let mut next = continuation(&last, w.option.unwrap_or(0), frozen);
    let mut adv = 0.0;
    for t in (0..b.samples.len()).rev() {
        if t + 1 < b.samples.len() {
            next = continuation(&b.samples[t + 1].heads, b.samples[t].option, frozen);
        }
        let s = &mut b.samples[t];
        let live = if s.done { 0.0 } else { 1.0 };
        let q = s.heads.q[s.option];
        let delta = s.reward + gamma * live * next - q;
        adv = delta + gamma * lambda * live * adv;
        s.advantage = adv;
        s.ret = adv + q;
    }
    Ok(b)
}

struct Optimizers {
    actor: Adam,
    log_std: Adam,
    critic: Adam,
    selector: Adam,
    termination: Adam,
}

/// Incremental trainer; [`train`] drives it to completion.
pub struct Trainer {
    pub cfg: TrainConfig,
    pub policy: Policy,
    pub curriculum: Curriculum,
    workers: Vec<Worker>,
    opt: Optimizers,
    rng: ChaCha8Rng,
    pub updates: usize,
    pub episodes: usize,
    best_level: usize,
    best_reward: f64,
    reward_ema: Option<f64>,
    stale: usize,
}

impl Trainer {
    pub fn new(cfg: TrainConfig) -> Result<Self> {
        cfg.check()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut policy = Policy::new(
            cfg.variant,
            if cfg.variant.uses_cpg() { cfg.options.clone() } else { vec![1.0] },
            cfg.cpg,
            &cfg.hidden,
            cfg.init_log_std,
            &mut rng,
        )?;
        policy.fixed_option = Some(policy.option_index(cfg.frozen_k_f));
        let mut curriculum = Curriculum::new(cfg.curriculum.clone())?;
        curriculum.index = 0;
        let level = *curriculum.current();
        let mut workers = Vec::with_capacity(cfg.n_envs);
        for i in 0..cfg.n_envs {
            let cpg = policy.cpg_for(policy.fixed_option.unwrap());
            let mut env = SnakeEnv::new(cpg, cfg.variant.uses_cpg(), cfg.env, &Pose::default(), false, cfg.seed, i as u64 + 1)?;
            env.begin_trial(&level, curriculum.radii());
            workers.push(Worker {
                env,
                option: None,
                ep_reward: 0.0,
            });
        }
        let lr = cfg.learning_rate;
        let opt = Optimizers {
            actor: Adam::new(policy.actor.params.len(), lr),
            log_std: Adam::new(N_OSC, lr),
            critic: Adam::new(policy.critic.params.len(), lr),
            selector: Adam::new(policy.selector.params.len(), lr),
            termination: Adam::new(policy.termination.params.len(), lr),
        };
        Ok(Self {
            cfg,
            policy,
            curriculum,
            workers,
            opt,
            rng,
            updates: 0,
            episodes: 0,
            best_level: 0,
            best_reward: f64::NEG_INFINITY,
            reward_ema: None,
            stale: 0,
        })
    }

    pub fn options_frozen(&self) -> bool {
        self.policy.fixed_option.is_some()
    }

    pub fn is_done(&self) -> bool {
        self.curriculum.completed || self.episodes >= self.cfg.max_episodes || self.cfg.max_updates.is_some_and(|m| self.updates >= m)
    }

    pub fn checkpoint(&self) -> PolicyCheckpoint {
        PolicyCheckpoint::new(
            self.policy.clone(),
            TrainingMeta {
                seed: self.cfg.seed,
                episodes: self.episodes,
                updates: self.updates,
                level: self.curriculum.current().level,
                completed: self.curriculum.completed,
                success_rate: self.curriculum.success_rate(),
            },
        )
    }

    /// Collect one batch from every robot and apply the PPO update.
    pub fn update(&mut self) -> Result<UpdateMetrics> {
        let level = *self.curriculum.current();
        let radii = self.curriculum.radii();
        let (steps, gamma, lambda) = (self.cfg.steps_per_env, self.cfg.gamma, self.cfg.gae_lambda);
        let policy = &self.policy;
        let batches: Vec<Result<Batch>> = self
            .workers
            .par_iter_mut()
            .map(|w| collect(w, policy, &level, &radii, steps, gamma, lambda))
            .collect();
        let batches = batches.into_iter().collect::<Result<Vec<_>>>()?;

        let mut promoted = false;
        let mut counts = [0usize; 4];
        let mut returns = Vec::new();
        for b in &batches {
            for &(o, r) in &b.finished {
                counts[Outcome::ALL.iter().position(|x| *x == o).unwrap()] += 1;
                returns.push(r);
                self.episodes += 1;
                if !self.curriculum.completed {
                    promoted |= self.curriculum.record(o == Outcome::Success);
                }
            }
        }
        let k_f_mean = batches.iter().map(|b| b.k_f_sum).sum::<f64>() / (steps * batches.len()) as f64;
        let features: Vec<[f64; N_FEATURES]> = batches.iter().flat_map(|b| b.features.iter().copied()).collect();
        let mut samples: Vec<Sample> = batches.into_iter().flat_map(|b| b.samples).collect();
        let step_reward = samples.iter().map(|s| s.reward).sum::<f64>() / samples.len() as f64;

        let (policy_loss, value_loss) = self.optimize(&mut samples)?;
        for f in &features {
            self.policy.normalizer.update(f);
        }
        self.updates += 1;
        self.track_plateau(step_reward);

        Ok(UpdateMetrics {
            update: self.updates,
            episodes: self.episodes,
            level: self.curriculum.current().level,
            success_rate: self.curriculum.success_rate(),
            mean_reward: (!returns.is_empty()).then(|| returns.iter().sum::<f64>() / returns.len() as f64),
            mean_step_reward: step_reward,
            success: counts[0],
            starved: counts[1],
            missed_goal: counts[2],
            timeout: counts[3],
            policy_loss,
            value_loss,
            mean_log_std: self.policy.log_std.iter().sum::<f64>() / N_OSC as f64,
            options_frozen: self.options_frozen(),
            mean_k_f: k_f_mean,
            promoted,
        })
    }

    fn track_plateau(&mut self, step_reward: f64) {
        if !self.options_frozen() {
            return;
        }
        let ema = match self.reward_ema {
            Some(e) => 0.9 * e + 0.1 * step_reward,
            None => step_reward,
        };
        self.reward_ema = Some(ema);
        let lvl = self.curriculum.index;
        if lvl > self.best_level || ema > self.best_reward + 1e-3 * self.best_reward.abs().max(1e-3) {
            self.best_level = self.best_level.max(lvl);
            self.best_reward = self.best_reward.max(ema);
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        let rule = self.cfg.unfreeze;
        let plateau = rule.plateau_updates > 0 && self.stale >= rule.plateau_updates;
        let forced = rule.after_updates.is_some_and(|n| self.updates >= n);
        if (plateau || forced) && self.policy.n_options() > 1 {
            self.policy.fixed_option = None;
        }
    }

    fn optimize(&mut self, samples: &mut [Sample]) -> Result<(f64, f64)> {
        let n = samples.len() as f64;
        let mean = samples.iter().map(|s| s.advantage).sum::<f64>() / n;
        let var = samples.iter().map(|s| (s.advantage - mean).powi(2)).sum::<f64>() / n;
        let scale = 1.0 / (var.sqrt() + 1e-8);
        let frozen = self.options_frozen();
        let n_opt = self.policy.n_options();
        let cfg = &self.cfg;
        let mut idx: Vec<usize> = (0..samples.len()).collect();
        let (mut pl_sum, mut vl_sum, mut count) = (0.0, 0.0, 0usize);
        for _ in 0..cfg.epochs {
            idx.shuffle(&mut self.rng);
            for chunk in idx.chunks(cfg.minibatch) {
                let p = &self.policy;
                let mut ga = vec![0.0; p.actor.params.len()];
                let mut gl = [0.0; N_OSC];
                let mut gc = vec![0.0; p.critic.params.len()];
                let mut gs = vec![0.0; p.selector.params.len()];
                let mut gt = vec![0.0; p.termination.params.len()];
                let m = chunk.len() as f64;
                let mut pl = 0.0;
                let mut vl = 0.0;
                for &i in chunk {
                    let s = &samples[i];
                    let adv = (s.advantage - mean) * scale;

                    let xm = mirror_state(&s.x);
                    let mut xa = s.x.to_vec();
                    let mut xb = xm.to_vec();
                    for k in 0..n_opt {
                        let h = if k == s.option { 1.0 } else { 0.0 };
                        xa.push(h);
                        xb.push(h);
                    }
                    let ta = p.actor.forward_trace(&xa);
                    let tb = p.actor.forward_trace(&xb);
                    let mu: [f64; N_OSC] = std::array::from_fn(|k| 0.5 * (ta.output()[k] - tb.output()[k]));
                    let logp = p.log_prob(&mu, &s.action);
                    let ratio = (logp - s.log_prob).exp();
                    let clipped = ratio.clamp(1.0 - cfg.clip, 1.0 + cfg.clip);
                    pl += -(ratio * adv).min(clipped * adv);
                    let active = !((adv >= 0.0 && ratio > 1.0 + cfg.clip) || (adv < 0.0 && ratio < 1.0 - cfg.clip));
                    let dlogp = if active { -adv * ratio / m } else { 0.0 };
                    let mut gmu = [0.0; N_OSC];
                    for k in 0..N_OSC {
                        let var = (2.0 * p.log_std[k]).exp();
                        let z = s.action[k] - mu[k];
                        gmu[k] = dlogp * z / var;
                        gl[k] += dlogp * (z * z / var - 1.0) - cfg.entropy_coef / m;
                    }
                    let half: Vec<f64> = gmu.iter().map(|g| 0.5 * g).collect();
                    let neg: Vec<f64> = gmu.iter().map(|g| -0.5 * g).collect();
                    p.actor.backward(&ta, &half, &mut ga);
                    p.actor.backward(&tb, &neg, &mut ga);

                    let ca = p.critic.forward_trace(&s.x);
                    let cb = p.critic.forward_trace(&xm);
                    let q = 0.5 * (ca.output()[s.option] + cb.output()[s.option]);
                    let err = q - s.ret;
                    vl += 0.5 * err * err;
                    let mut gq = vec![0.0; n_opt];
                    gq[s.option] = 0.5 * cfg.value_coef * err / m;
                    p.critic.backward(&ca, &gq, &mut gc);
                    p.critic.backward(&cb, &gq, &mut gc);

                    if !frozen {
                        let v_old = s.heads.value();
                        if s.selected {
                            let sa = p.selector.forward_trace(&s.x);
                            let sb = p.selector.forward_trace(&xm);
                            let logits: Vec<f64> = (0..n_opt).map(|k| 0.5 * (sa.output()[k] + sb.output()[k])).collect();
                            let pr = softmax(&logits);
                            let a_opt = s.heads.q[s.option] - v_old;
                            let ent: f64 = -pr.iter().map(|x| x * x.max(1e-12).ln()).sum::<f64>();
                            let g: Vec<f64> = (0..n_opt)
                                .map(|k| {
                                    let ind = if k == s.option { 1.0 } else { 0.0 };
                                    // entropy gradient w.r.t. logit k is -p_k (ln p_k + H)
                                    let dent = -pr[k] * (pr[k].max(1e-12).ln() + ent);
                                    0.5 * (-a_opt * (ind - pr[k]) - cfg.option_entropy_coef * dent) / m
                                })
                                .collect();
                            p.selector.backward(&sa, &g, &mut gs);
                            p.selector.backward(&sb, &g, &mut gs);
                        }
                        if let Some(prev) = s.prev {
                            let ta2 = p.termination.forward_trace(&s.x);
                            let tb2 = p.termination.forward_trace(&xm);
                            let beta = super::policy::sigmoid(0.5 * (ta2.output()[prev] + tb2.output()[prev]));
                            let a_term = s.heads.q[prev] - v_old + cfg.termination_margin;
                            let mut g = vec![0.0; n_opt];
                            g[prev] = 0.5 * beta * (1.0 - beta) * a_term / m;
                            p.termination.backward(&ta2, &g, &mut gt);
                            p.termination.backward(&tb2, &g, &mut gt);
                        }
                    }
                }
                if !(pl.is_finite() && vl.is_finite()) {
                    return Err(Error::TrainingDiverged {
                        update: self.updates,
                        reason: format!("non-finite loss (policy {pl}, value {vl})"),
                    });
                }
                pl_sum += pl / m;
                vl_sum += vl / m;
                count += 1;
                let maxn = cfg.max_grad_norm;
                clip_grad_norm(&mut ga, maxn);
                clip_grad_norm(&mut gc, maxn);
                let p = &mut self.policy;
                self.opt.actor.step(&mut p.actor.params, &ga);
                self.opt.log_std.step(&mut p.log_std, &gl);
                for v in p.log_std.iter_mut() {
                    *v = v.max(cfg.min_log_std);
                }
                self.opt.critic.step(&mut p.critic.params, &gc);
                if !frozen {
                    clip_grad_norm(&mut gs, maxn);
                    clip_grad_norm(&mut gt, maxn);
                    self.opt.selector.step(&mut p.selector.params, &gs);
                    self.opt.termination.step(&mut p.termination.params, &gt);
                }
                if !p.is_finite() {
                    return Err(Error::TrainingDiverged {
                        update: self.updates,
                        reason: "non-finite weights".into(),
                    });
                }
            }
        }
        Ok((pl_sum / count as f64, vl_sum / count as f64))
    }
}

/// Result of a finished training run.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub checkpoint: PolicyCheckpoint,
    pub metrics: Vec<UpdateMetrics>,
}

/// Train until the curriculum is completed or the budget runs out.
///
/// With `out_dir`, metrics are streamed to `metrics.ndjson` and the policy
/// is written to `checkpoint.json` every `checkpoint_every` updates and at
/// the end. On divergence the last good checkpoint is written before the
/// error is returned.
pub fn train(cfg: &TrainConfig, out_dir: Option<&Path>) -> Result<TrainReport> {
    let mut trainer = Trainer::new(cfg.clone())?;
    let mut metrics_file = match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|source| Error::File {
                path: dir.to_path_buf(),
                source,
            })?;
            let path = dir.join("metrics.ndjson");
            let f = File::create(&path).map_err(|source| Error::File { path, source })?;
            Some(BufWriter::new(f))
        }
        None => None,
    };
    let save = |c: &PolicyCheckpoint| -> Result<()> {
        match out_dir {
            Some(dir) => c.save(&dir.join("checkpoint.json")),
            None => Ok(()),
        }
    };
    let mut last_good = trainer.checkpoint();
    let mut metrics = Vec::new();
    while !trainer.is_done() {
        let m = match trainer.update() {
            Ok(m) => m,
            Err(e) => {
                save(&last_good)?;
                return Err(e);
            }
        };
        if let Some(f) = metrics_file.as_mut() {
            serde_json::to_writer(&mut *f, &m)?;
            f.write_all(b"\n")?;
            f.flush()?;
        }
        metrics.push(m);
        last_good = trainer.checkpoint();
        if cfg.checkpoint_every > 0 && trainer.updates % cfg.checkpoint_every == 0 {
            save(&last_good)?;
        }
    }
    save(&last_good)?;
    Ok(TrainReport {
        checkpoint: last_good,
        metrics,
    })
}
