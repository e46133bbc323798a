use matsuoka_snake::cpg::{
    decode_action, simulate, step_network, validate_params, NetworkState, OscillatorParams, TonicInputs, N_OSC,
};
use proptest::prelude::*;

const DT: f64 = 1e-3;

fn table() -> OscillatorParams {
    OscillatorParams::TABLE_I
}

#[test]
fn zero_input_origin_is_exactly_fixed() {
    let tr = simulate(&table(), &TonicInputs::uniform(0.0, 0.0), 5.0, DT, &NetworkState::ZERO).unwrap();
    assert!(tr.states.iter().all(|s| *s == NetworkState::ZERO));
    assert!(tr.outputs.iter().all(|o| o.psi == [0.0; N_OSC]));
}

#[test]
fn output_is_rectified_difference() {
    let p = table();
    let tr = simulate(&p, &TonicInputs::uniform(1.0, 1.0), 10.0, DT, &NetworkState::seeded()).unwrap();
    for (s, o) in tr.states.iter().zip(&tr.outputs) {
        for i in 0..N_OSC {
            let want = p.a_z * (s.x_e[i].max(0.0) - s.x_f[i].max(0.0));
            assert_eq!(o.psi[i], want);
        }
    }
}

#[test]
fn adaptation_stays_non_negative() {
    // y' = (z - y) / tau_a with z >= 0, so y never goes below its start
    let tr = simulate(&table(), &TonicInputs::exclusive([0.8; N_OSC]), 30.0, DT, &NetworkState::seeded()).unwrap();
    for s in &tr.states {
        assert!(s.y_e.iter().chain(&s.y_f).all(|&y| y >= 0.0), "{s:?}");
    }
}

#[test]
fn mirror_antisymmetry() {
    let p = table().with_c(0.4);
    let u = TonicInputs {
        u_e: [0.9, 0.2, 0.6, 0.35],
        u_f: [0.1, 0.7, 0.45, 0.5],
    };
    let swapped = TonicInputs { u_e: u.u_f, u_f: u.u_e };
    let a = simulate(&p, &u, 30.0, DT, &NetworkState::seeded()).unwrap();
    let b = simulate(&p, &swapped, 30.0, DT, &NetworkState::seeded().mirrored()).unwrap();
    let worst = a
        .outputs
        .iter()
        .zip(&b.outputs)
        .flat_map(|(x, y)| (0..N_OSC).map(move |i| (x.psi[i] + y.psi[i]).abs()))
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst:e}");
}

#[test]
fn frequency_ratio_rescales_time() {
    // x(t; K_f) = x(t / K_f; 1): sample k of the K_f = 0.5 run against
    // sample 2k of the K_f = 1 run
    let p = table();
    let u = TonicInputs::uniform(1.0, 1.0);
    let slow = simulate(&p.with_k_f(0.5), &u, 10.0, DT, &NetworkState::seeded()).unwrap();
    let fast = simulate(&p, &u, 20.0, DT, &NetworkState::seeded()).unwrap();
    let scale = fast.outputs.iter().flat_map(|o| o.psi).fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst: f64 = 0.0;
    for k in 0..slow.len() {
        for i in 0..N_OSC {
            worst = worst.max((slow.outputs[k].psi[i] - fast.outputs[2 * k].psi[i]).abs());
        }
    }
    assert!(worst / scale < 1e-4, "relative error {:e}", worst / scale);
}

#[test]
fn outputs_obey_the_input_bound() {
    // every inhibition term is non-negative, so x <= max(u) + c once it
    // starts there and |psi| <= A_z (max(u) + c)
    let p = table().with_c(0.2);
    let mut s = NetworkState::seeded();
    let bound = p.a_z * (1.0 + p.c);
    let mut worst: f64 = 0.0;
    for k in 0..1200 {
        let a = [(k as f64 * 0.37).sin() * 3.0, (k as f64 * 0.11).cos() * 2.0, 0.5, -1.0];
        let u = decode_action(&a);
        for _ in 0..50 {
            s = step_network(&s, &u, &p, DT).unwrap();
            worst = worst.max(s.output(&p).psi.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
    }
    assert!(worst <= bound, "{worst} > {bound}");
}

proptest! {
    #[test]
    fn decoded_inputs_are_exclusive(a in prop::array::uniform4(-20.0f64..20.0)) {
        let u = decode_action(&a);
        for i in 0..N_OSC {
            prop_assert!((0.0..=1.0).contains(&u.u_e[i]));
            prop_assert!((u.u_e[i] + u.u_f[i] - 1.0).abs() <= f64::EPSILON);
        }
    }

    #[test]
    fn existence_predicate_arithmetic(tau_r in 0.05f64..5.0, tau_a in 0.05f64..5.0, b in 0.01f64..20.0) {
        let p = OscillatorParams { tau_r, tau_a, b, ..OscillatorParams::TABLE_I };
        let r = validate_params(&p).unwrap();
        let lhs = (tau_a - tau_r) * (tau_a - tau_r);
        let rhs = 4.0 * tau_r * tau_a * b;
        prop_assert!((r.lhs - lhs).abs() <= 1e-12 * lhs.max(1.0));
        prop_assert!((r.rhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        prop_assert_eq!(r.oscillation_possible, r.lhs < r.rhs);
    }

    #[test]
    fn one_rk4_step_from_rest_with_zero_drive_stays_put(c in 0.0f64..0.0001) {
        let p = table().with_c(c);
        let s = step_network(&NetworkState::ZERO, &TonicInputs::uniform(0.0, 0.0), &p, DT).unwrap();
        if c == 0.0 {
            prop_assert_eq!(s, NetworkState::ZERO);
        } else {
            prop_assert!(s.x_e.iter().all(|&x| x > 0.0));
        }
    }
}
