use matsuoka_snake::cpg::OscillatorParams;
use matsuoka_snake::rl::{
    monotonicity_violations, rollout, Curriculum, CurriculumLevel, EpisodeConfig, GoalScript, Policy, PolicyCheckpoint, RolloutConfig,
    TrainConfig, Trainer, Variant, TABLE_II,
};
use matsuoka_snake::snake::PhysicsParams;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn untrained(seed: u64) -> Policy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Policy::new(Variant::FocPpocCpg, vec![0.5, 1.0], OscillatorParams::TABLE_I, &[16, 16], -0.5, &mut rng).unwrap();
    p.fixed_option = Some(1);
    p
}

fn tiny_training(seed: u64) -> TrainConfig {
    TrainConfig {
        seed,
        n_envs: 2,
        steps_per_env: 64,
        minibatch: 32,
        epochs: 2,
        max_updates: Some(2),
        ..TrainConfig::smoke()
    }
}

#[test]
fn mirrored_rollout_is_the_reflection() {
    let policy = untrained(3);
    let phys = PhysicsParams::default();
    let base = RolloutConfig {
        script: GoalScript::Single { distance: 1.2, angle: 35.0 },
        episode: EpisodeConfig {
            max_steps: 120,
            ..Default::default()
        },
        ..Default::default()
    };
    let a = rollout(&policy, &phys, &base).unwrap();
    let b = rollout(&policy, &phys, &RolloutConfig { mirrored: true, ..base }).unwrap();
    assert_eq!(a[0].steps.len(), b[0].steps.len());
    assert_eq!(a[0].outcome, b[0].outcome);
    for (s, m) in a[0].steps.iter().zip(&b[0].steps) {
        assert!((s.row.head[0] - m.row.head[0]).abs() < 1e-6);
        assert!((s.row.head[1] + m.row.head[1]).abs() < 1e-6);
        for i in 0..4 {
            assert!((s.row.psi[i] + m.row.psi[i]).abs() < 1e-6, "psi{} at t={}", i + 1, s.row.t);
        }
        assert!((s.reward - m.reward).abs() < 1e-6);
    }
}

#[test]
fn same_seed_trains_identically() {
    let run = |seed| {
        let mut t = Trainer::new(tiny_training(seed)).unwrap();
        let mut m = Vec::new();
        while !t.is_done() {
            m.push(t.update().unwrap());
        }
        (m, t.checkpoint())
    };
    let (m1, c1) = run(5);
    let (m2, c2) = run(5);
    assert_eq!(m1.len(), 2);
    assert_eq!(m1, m2);
    assert_eq!(c1, c2);
    let (_, c3) = run(6);
    assert_ne!(c1.policy, c3.policy);
}

#[test]
fn checkpoint_survives_disk() {
    let dir = std::env::temp_dir().join(format!("msnake-ckpt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let report = matsuoka_snake::rl::train(&tiny_training(1), Some(&dir)).unwrap();
    let back = PolicyCheckpoint::load(&dir.join("checkpoint.json")).unwrap();
    assert_eq!(back, report.checkpoint);
    assert_eq!(back.meta.updates, 2);
    let lines = std::fs::read_to_string(dir.join("metrics.ndjson")).unwrap();
    assert_eq!(lines.lines().count(), 2);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn shipped_curriculum_breaks_only_the_band_rule() {
    let v = monotonicity_violations(&TABLE_II);
    assert!(!v.is_empty());
    for s in &v {
        assert!(s.ends_with("distance band widens"), "{s}");
    }
}

fn level() -> impl Strategy<Value = CurriculumLevel> {
    (0.2f64..2.0, 0.0f64..1.0, -90.0f64..0.0, 0.0f64..90.0, 0.01f64..0.5).prop_map(|(lo, w, alo, ahi, r)| CurriculumLevel {
        level: 1,
        rho_lo: lo,
        rho_hi: lo + w,
        angle_lo: alo,
        angle_hi: ahi,
        radius: r,
        sigma: 0.9,
        window: 10,
    })
}

proptest! {
    #[test]
    fn goals_land_in_the_fan(l in level(), x in -5.0f64..5.0, y in -5.0f64..5.0, h in -3.0f64..3.0, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = l.sample_goal([x, y], h, &mut rng);
        let (dx, dy) = (g.position[0] - x, g.position[1] - y);
        let rho = dx.hypot(dy);
        prop_assert!(rho >= l.rho_lo - 1e-9 && rho <= l.rho_hi + 1e-9);
        let ang = matsuoka_snake::snake::wrap_angle(dy.atan2(dx) - h).to_degrees();
        prop_assert!(ang >= l.angle_lo - 1e-6 && ang <= l.angle_hi + 1e-6);
        prop_assert_eq!(g.radius, l.radius);
    }

    #[test]
    fn promotion_follows_the_window(trials in prop::collection::vec(any::<bool>(), 0..60)) {
        let levels = vec![
            CurriculumLevel { level: 1, sigma: 0.8, window: 10, ..TABLE_II[0] },
            CurriculumLevel { level: 2, sigma: 0.8, window: 10, ..TABLE_II[1] },
        ];
        let mut c = Curriculum::new(levels).unwrap();
        let mut window: Vec<bool> = Vec::new();
        for s in trials {
            if c.completed {
                break;
            }
            let before = c.index;
            window.push(s);
            if window.len() > 10 {
                window.remove(0);
            }
            let expect = window.len() == 10 && window.iter().filter(|&&b| b).count() >= 8;
            let promoted = c.record(s);
            prop_assert_eq!(promoted || c.completed, expect);
            if expect {
                prop_assert!(c.index == before + 1 || c.completed);
                window.clear();
            }
        }
    }
}
