use matsuoka_snake::cpg::OscillatorParams;
use matsuoka_snake::gp::{evolve, fitness, EvolveConfig, FitnessConfig, GeneBounds, Genome};
use matsuoka_snake::snake::PhysicsParams;
use proptest::prelude::*;

const BASE: OscillatorParams = OscillatorParams::TABLE_I;

#[test]
fn table_i_beats_a_silent_network() {
    let fit = FitnessConfig::default();
    let phys = PhysicsParams::default();
    let good = fitness(&Genome::from_params(&BASE), &BASE, &fit, &phys);
    // adaptation too weak for the time constants to allow an oscillation
    let mut weak = Genome::from_params(&BASE);
    weak.genes[..3].copy_from_slice(&[0.01, 0.1, 5.0]);
    assert!(!weak.is_feasible(&BASE));
    assert_eq!(fitness(&weak, &BASE, &fit, &phys), f64::NEG_INFINITY);
    assert!(good.is_finite(), "{good}");
}

#[test]
fn fitness_is_deterministic() {
    let fit = FitnessConfig {
        horizon: 2.0,
        ..Default::default()
    };
    let phys = PhysicsParams::default();
    let g = Genome::from_params(&BASE);
    assert_eq!(fitness(&g, &BASE, &fit, &phys), fitness(&g, &BASE, &fit, &phys));
}

#[test]
fn short_search_keeps_its_best() {
    let cfg = EvolveConfig {
        population: 8,
        generations: 4,
        seed: 11,
        include_base: false,
        ..Default::default()
    };
    let fit = FitnessConfig {
        horizon: 2.0,
        ..Default::default()
    };
    let bounds = GeneBounds::default();
    let r = evolve(&BASE, &bounds, &fit, &PhysicsParams::default(), &cfg).unwrap();
    assert_eq!(r.history.len(), 5);
    for w in r.history.windows(2) {
        assert!(w[1].best >= w[0].best);
    }
    assert_eq!(r.best_fitness, r.history.last().unwrap().best);
    assert!(bounds.contains(&r.best));
    assert_eq!(r.params, r.best.decode(&BASE));
}

proptest! {
    #[test]
    fn standing_still_never_scores_positive(theta in -3.2f64..3.2) {
        prop_assert!(FitnessConfig::default().score(0.0, theta, 0.0) <= 0.0);
    }

    #[test]
    fn faster_is_fitter(v in 0.0f64..1.0, dv in 1e-6f64..1.0, theta in -3.2f64..3.2, d in -2.0f64..2.0) {
        let f = FitnessConfig::default();
        prop_assert!(f.score(v + dv, theta, d) > f.score(v, theta, d));
        prop_assert!(f.score(-v - dv, theta, d) > f.score(-v, theta, d));
    }

    #[test]
    fn facing_the_goal_is_fitter(v in -1.0f64..1.0, t in 0.0f64..3.0, dt in 1e-6f64..0.1, d in -2.0f64..2.0) {
        let f = FitnessConfig::default();
        prop_assert!(f.score(v, t, d) > f.score(v, t + dt, d));
        prop_assert!(f.score(v, -t, d) > f.score(v, -t - dt, d));
    }

    #[test]
    fn clamped_genomes_are_in_bounds(genes in prop::array::uniform7(-100.0f64..100.0)) {
        let b = GeneBounds::default();
        let mut g = Genome { genes };
        b.clamp(&mut g);
        prop_assert!(b.contains(&g));
    }
}
