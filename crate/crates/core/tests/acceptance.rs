//! One pass/fail line per acceptance criterion. Run with
//! `cargo test -p matsuoka-snake --test acceptance`; the process exits
//! non-zero when any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use matsuoka_snake::analysis::sweeps::{bias_sweep, duty_sweep, frequency_sweep, linspace, SweepConfig};
use matsuoka_snake::analysis::{entrainment_threshold, gate_fourier_k, gate_fourier_l};
use matsuoka_snake::cpg::{decode_action, simulate, validate_params, NetworkState, OscillatorParams, TonicInputs, N_OSC};
use matsuoka_snake::gp::{evolve, oscillates, rollout_displacement, EvolveConfig, FitnessConfig, GeneBounds};
use matsuoka_snake::rl::{
    monotonicity_violations, steering_study, steering_summary, train, Curriculum, Policy, SteeringConfig, TrainConfig, TABLE_II,
};
use matsuoka_snake::snake::{velocity_sweep, PhysicsParams, VelocitySweepConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

const TABLE_I: OscillatorParams = OscillatorParams::TABLE_I;
const DT: f64 = 1e-3;
/// Seed of the smoke training run shared by criteria 10 and 11.
const TRAIN_SEED: u64 = 1;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn threshold_anchor() -> Check {
    let p = TABLE_I.with_c(0.75);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for w in linspace(3.77, 5.02, 201) {
        let a = entrainment_threshold(w, &p).map_err(|e| e.to_string())?.limit();
        lo = lo.min(a);
        hi = hi.max(a);
    }
    ensure(lo >= 0.39 - 0.02 && hi <= 0.83 + 0.02, format!("A0 in [{lo:.4}, {hi:.4}] over 201 points"))
}

fn zero_c_degenerates() -> Check {
    let p = TABLE_I.with_c(0.0);
    let mut worst: f64 = 0.0;
    for w in linspace(0.1, 20.0, 400) {
        worst = worst.max(entrainment_threshold(w, &p).map_err(|e| e.to_string())?.limit().abs());
    }
    ensure(worst == 0.0, format!("max |A0| = {worst:e} over 400 frequencies"))
}

/// Quadrature over `[-pi, pi]` split at the kinks of `max(0, cos t + r)`.
fn integral(r: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut cuts = vec![-PI, PI];
    if (-1.0..=1.0).contains(&r) {
        let t0 = (-r).acos();
        cuts.extend([-t0, t0]);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| quadrature::double_exponential::integrate(&f, w[0], w[1], 1e-14).integral)
        .sum()
}

fn describing_oracles() -> Check {
    let mut worst: f64 = 0.0;
    for i in 0..=100 {
        let r = -1.0 + 0.02 * i as f64;
        let k = integral(r, |t| (t.cos() + r).max(0.0) * t.cos()) / PI;
        let l = integral(r, |t| (t.cos() + r).max(0.0)) / (2.0 * PI);
        worst = worst.max((gate_fourier_k(r) - k).abs()).max((gate_fourier_l(r) - l).abs());
    }
    ensure(worst < 1e-9, format!("max deviation {worst:.2e} at 101 points"))
}

fn proposition_1() -> Check {
    let grid = linspace(0.0, 0.5, 26);
    let mut ok = true;
    let mut parts = Vec::new();
    for k_n in [0.19, 0.39, 0.53, 0.66, 0.79] {
        let s = bias_sweep(&TABLE_I, k_n, &grid, &SweepConfig::default());
        match s.fit {
            Some(f) => {
                let pass = (f.slope - 1.0).abs() <= 0.15 && f.r_squared >= 0.95 && s.has_fixed_point_region;
                ok &= pass;
                parts.push(format!(
                    "Kn {k_n}: slope {:.3} R2 {:.4} onset {:?}{}",
                    f.slope,
                    f.r_squared,
                    s.onset,
                    if pass { "" } else { " (out)" }
                ));
            }
            None => {
                ok = false;
                parts.push(format!("Kn {k_n}: no limit-cycle points"));
            }
        }
    }
    ensure(ok, parts.join("; "))
}

fn proposition_2() -> Check {
    let s = duty_sweep(&TABLE_I, &linspace(0.1, 0.9, 17), None, &SweepConfig::default());
    let f = s.fit.ok_or("no limit-cycle points")?;
    ensure(f.r_squared >= 0.9, format!("bias = {:.4} duty + {:.4}, R2 {:.4}, {} points", f.slope, f.intercept, f.r_squared, f.n))
}

fn frequency_law() -> Check {
    let s = frequency_sweep(&TABLE_I, TonicInputs::uniform(1.0, 1.0), &linspace(0.45, 1.05, 13), &SweepConfig::default());
    let e = s.exponent().ok_or("no limit-cycle points")?;
    // x(t; K_f) = x(t / K_f; 1)
    let u = TonicInputs::uniform(1.0, 1.0);
    let slow = simulate(&TABLE_I.with_k_f(0.5), &u, 10.0, DT, &NetworkState::seeded()).map_err(|e| e.to_string())?;
    let fast = simulate(&TABLE_I, &u, 20.0, DT, &NetworkState::seeded()).map_err(|e| e.to_string())?;
    let scale = fast.outputs.iter().flat_map(|o| o.psi).fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = (0..slow.len())
        .flat_map(|k| (0..N_OSC).map(move |i| (k, i)))
        .map(|(k, i)| (slow.outputs[k].psi[i] - fast.outputs[2 * k].psi[i]).abs())
        .fold(0.0, f64::max);
    let rel = worst / scale;
    ensure(
        (e + 0.5).abs() <= 0.05 && rel < 1e-4,
        format!("exponent {e:.4} (want -0.5 +- 0.05), rescaling error {rel:.2e}"),
    )
}

fn structural() -> Check {
    let mut fails = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let mut excl: f64 = 0.0;
    for _ in 0..10_000 {
        let a: [f64; N_OSC] = std::array::from_fn(|_| rng.random_range(-30.0..30.0));
        let u = decode_action(&a);
        for i in 0..N_OSC {
            excl = excl.max((u.u_e[i] + u.u_f[i] - 1.0).abs());
        }
    }
    if excl > f64::EPSILON {
        fails.push(format!("exclusiveness off by {excl:e}"));
    }

    let rest = simulate(&TABLE_I, &TonicInputs::uniform(0.0, 0.0), 5.0, DT, &NetworkState::ZERO).map_err(|e| e.to_string())?;
    if !rest.states.iter().all(|s| *s == NetworkState::ZERO) {
        fails.push("zero input leaves the origin".into());
    }

    let p = TABLE_I.with_c(0.4);
    let u = TonicInputs {
        u_e: [0.9, 0.2, 0.6, 0.35],
        u_f: [0.1, 0.7, 0.45, 0.5],
    };
    let a = simulate(&p, &u, 30.0, DT, &NetworkState::seeded()).map_err(|e| e.to_string())?;
    let b = simulate(&p, &TonicInputs { u_e: u.u_f, u_f: u.u_e }, 30.0, DT, &NetworkState::seeded().mirrored())
        .map_err(|e| e.to_string())?;
    let mirror = a
        .outputs
        .iter()
        .zip(&b.outputs)
        .flat_map(|(x, y)| (0..N_OSC).map(move |i| (x.psi[i] + y.psi[i]).abs()))
        .fold(0.0, f64::max);
    if mirror >= 1e-9 {
        fails.push(format!("mirror deviation {mirror:e}"));
    }

    // z >= 0 and |psi| <= 1 over 60 s for constant inputs on a grid of [0,1]^2
    let levels = linspace(0.0, 1.0, 5);
    let mut neg_z = false;
    let mut peak = (0.0f64, 0.0, 0.0);
    for &ue in &levels {
        for &uf in &levels {
            let tr = simulate(&TABLE_I, &TonicInputs::uniform(ue, uf), 60.0, DT, &NetworkState::seeded()).map_err(|e| e.to_string())?;
            for s in &tr.states {
                neg_z |= s.y_e.iter().chain(&s.y_f).any(|&y| y < 0.0);
            }
            let m = tr.outputs.iter().flat_map(|o| o.psi).fold(0.0f64, |m, v| m.max(v.abs()));
            if m > peak.0 {
                peak = (m, ue, uf);
            }
        }
    }
    if neg_z {
        fails.push("negative adaptation state".into());
    }
    if peak.0 > 1.0 {
        fails.push(format!("max |psi| {:.3} > 1 at u_e {}, u_f {}", peak.0, peak.1, peak.2));
    }

    for _ in 0..10_000 {
        let (tau_r, tau_a, bb) = (rng.random_range(0.05..5.0), rng.random_range(0.05..5.0), rng.random_range(0.01..20.0));
        let q = OscillatorParams {
            tau_r,
            tau_a,
            b: bb,
            ..TABLE_I
        };
        let r = validate_params(&q).map_err(|e| e.to_string())?;
        if r.oscillation_possible != ((tau_a - tau_r).powi(2) < 4.0 * tau_r * tau_a * bb) {
            fails.push(format!("existence predicate wrong at {tau_r}, {tau_a}, {bb}"));
            break;
        }
    }

    let summary = format!("exclusiveness {excl:.1e}, mirror {mirror:.1e}, peak |psi| {:.3}", peak.0);
    if fails.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", fails.join("; ")))
    }
}

fn velocity_study() -> Check {
    let s = velocity_sweep(
        &TABLE_I,
        &linspace(0.4, 0.8, 10),
        &linspace(0.45, 1.05, 10),
        &PhysicsParams::default(),
        &VelocitySweepConfig::default(),
    );
    let rho = s.kf_correlations();
    let min_rho = rho.iter().copied().fold(f64::INFINITY, f64::min);
    let (along_kf, along_c) = s.spreads();
    ensure(
        min_rho > 0.9 && along_c < along_kf,
        format!("min Spearman {min_rho:.3}, speed std along K_f {along_kf:.4} vs along c {along_c:.4}"),
    )
}

fn gp_tuner() -> Check {
    let cfg = EvolveConfig {
        generations: 30,
        include_base: false,
        ..Default::default()
    };
    let phys = PhysicsParams::default();
    let r = evolve(&TABLE_I, &GeneBounds::default(), &FitnessConfig::default(), &phys, &cfg).map_err(|e| e.to_string())?;
    let monotone = r.history.windows(2).all(|w| w[1].best >= w[0].best);
    let osc = oscillates(&r.params, 60.0).map_err(|e| e.to_string())?;
    let d = rollout_displacement(&r.params, &phys, 6.4).map_err(|e| e.to_string())?;
    ensure(
        monotone && osc && d > 0.0,
        format!("best F {:.3}, history monotone {monotone}, oscillates {osc}, displacement {d:.3} m", r.best_fitness),
    )
}

fn rl_smoke(policy: &mut Option<Policy>) -> Check {
    let cfg = TrainConfig {
        seed: TRAIN_SEED,
        ..TrainConfig::smoke()
    };
    let report = train(&cfg, None).map_err(|e| e.to_string())?;
    let meta = &report.checkpoint.meta;
    *policy = Some(report.checkpoint.policy.clone());

    let violations = monotonicity_violations(&TABLE_II);
    // promotion needs a full window at the level's success fraction
    let mut c = Curriculum::new(TABLE_II[..2].to_vec()).map_err(|e| e.to_string())?;
    let mut promotion_ok = true;
    for k in 0..100 {
        let promoted = c.record(k % 10 != 0);
        promotion_ok &= promoted == (k == 99);
    }
    promotion_ok &= c.index == 1;

    let reached = meta.completed && meta.level == 2 && meta.success_rate >= 0.8;
    let detail = format!(
        "seed {TRAIN_SEED}: level {} completed {} success {:.2} after {} episodes (budget {}); promotion {}; Table II violations: {}",
        meta.level,
        meta.completed,
        meta.success_rate,
        meta.episodes,
        cfg.max_episodes,
        if promotion_ok { "ok" } else { "wrong" },
        if violations.is_empty() { "none".to_string() } else { violations.join(", ") }
    );
    ensure(reached && promotion_ok && violations.is_empty(), detail)
}

fn steering(policy: &Option<Policy>) -> Check {
    let policy = policy.as_ref().ok_or("no trained policy (criterion 10 did not produce one)")?;
    let angles = [-90.0, -60.0, -30.0, 30.0, 60.0, 90.0];
    let pts = steering_study(policy, &PhysicsParams::default(), &angles, &SteeringConfig::default()).map_err(|e| e.to_string())?;
    let (monotone, r2) = steering_summary(&pts);
    let r2 = r2.unwrap_or(f64::NAN);
    let biases: Vec<String> = pts.iter().map(|p| format!("{:.3}", p.bias_psi)).collect();
    ensure(
        monotone && r2 >= 0.85,
        format!("bias(psi1) [{}] monotone {monotone}, R2 {r2:.3}", biases.join(", ")),
    )
}

fn main() -> ExitCode {
    let mut policy = None;
    let mut failed = 0;
    let mut run = |n: usize, name: &str, f: &mut dyn FnMut() -> Check| {
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("criterion {n}: PASS {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("criterion {n}: FAIL {name}: {d} [{secs:.1}s]");
            }
        }
    };
    run(1, "entrainment threshold", &mut threshold_anchor);
    run(2, "c = 0 degeneracy", &mut zero_c_degenerates);
    run(3, "describing-function oracles", &mut describing_oracles);
    run(4, "bias vs constant input", &mut proposition_1);
    run(5, "bias vs duty cycle", &mut proposition_2);
    run(6, "frequency law", &mut frequency_law);
    run(7, "structural invariants", &mut structural);
    run(8, "velocity sweep", &mut velocity_study);
    run(9, "GP tuner", &mut gp_tuner);
    run(10, "RL smoke test", &mut || rl_smoke(&mut policy));
    run(11, "steering linearity", &mut || steering(&policy));
    println!("{} of 11 criteria failed", failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
