mod common;

use common::{fd_lagrangian_accel, passive_energy_series, rel_err, trend_per_second};
use myoarm::arm::{
    end_effector, forward_dynamics, gravity_torque, mass_matrix, reference_rk4_step, step, ArmParams, ArmState,
    Perturbation,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(rng: &mut ChaCha8Rng) -> (ArmState, [f64; 2]) {
    let s = ArmState {
        theta: [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)],
        dtheta: [rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0)],
        pendulum: None,
        t: 0.0,
    };
    (s, [rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0)])
}

#[test]
fn forward_dynamics_matches_lagrangian_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let params = [ArmParams::default(), ArmParams { m_extra: 2.0, m_hand: 1.2, ..ArmParams::default() }];
    for p in params {
        for _ in 0..100 {
            let (s, tau) = random_state(&mut rng);
            let acc = forward_dynamics(&s, tau, &p).unwrap();
            let oracle = fd_lagrangian_accel(s.theta, s.dtheta, tau, &p);
            assert!(rel_err(acc, oracle) <= 1e-4, "{acc:?} vs {oracle:?}");
        }
    }
}

#[test]
fn mass_matrix_is_spd() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = ArmParams::default();
    for _ in 0..1000 {
        let th = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
        let m = mass_matrix(th, &p);
        assert_eq!(m[0][1], m[1][0]);
        assert!(m[0][0] > 0.0);
        assert!(m[0][0] * m[1][1] - m[0][1] * m[1][0] > 0.0);
    }
}

#[test]
fn extra_mass_raises_gravity_at_horizontal() {
    let p = ArmParams::default();
    let mut prev = gravity_torque([0.0, 0.0], &p);
    for kg in 1..=5 {
        let g = gravity_torque([0.0, 0.0], &ArmParams { m_extra: kg as f64, ..p });
        assert!(g[0].abs() > prev[0].abs() && g[1].abs() > prev[1].abs());
        prev = g;
    }
}

#[test]
fn passive_energy_drift_below_half_percent_per_second() {
    let series = passive_energy_series(1.0);
    let drift = trend_per_second(&series).abs();
    assert!(drift < 5e-3, "energy drift {drift}/s");
    // The first-order scheme still oscillates in energy; keep that bounded too.
    let peak = series.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    assert!(peak < 0.02, "peak energy error {peak}");
}

#[test]
fn passive_energy_does_not_grow_over_ten_seconds() {
    let series = passive_energy_series(10.0);
    assert!(trend_per_second(&series).abs() < 1e-3);
}

/// Error at t = 0.25 s against a fine RK4 reference, for a sequence of halved steps.
fn global_errors() -> Vec<(f64, f64)> {
    let p = ArmParams::default();
    let s0 = ArmState { theta: [0.3, 0.8], dtheta: [1.0, -0.5], pendulum: None, t: 0.0 };
    let tau = [2.0, -1.0];
    let horizon: f64 = 0.25;
    let mut reference = s0;
    let fine = 1e-5;
    for _ in 0..(horizon / fine).round() as usize {
        reference = reference_rk4_step(&reference, tau, fine, &p);
    }
    [0.005, 0.0025, 0.00125, 0.000625]
        .iter()
        .map(|&dt| {
            let mut s = s0;
            for _ in 0..(horizon / dt).round() as usize {
                s = step(&s, tau, dt, &p, &Perturbation::none()).unwrap().state;
            }
            let e = ((s.theta[0] - reference.theta[0]).powi(2) + (s.theta[1] - reference.theta[1]).powi(2)).sqrt();
            (dt, e)
        })
        .collect()
}

#[test]
fn semi_implicit_euler_is_first_order() {
    let errs = global_errors();
    let (xs, ys): (Vec<f64>, Vec<f64>) = errs.iter().map(|(dt, e)| (dt.ln(), e.ln())).unzip();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((0.85..1.15).contains(&slope), "slope {slope}, errors {errs:?}");
    for w in errs.windows(2) {
        let ratio = w[0].1 / w[1].1;
        assert!((1.7..2.3).contains(&ratio), "halving ratio {ratio}");
    }
}

#[test]
fn hand_velocity_matches_position_differences() {
    let p = ArmParams::default();
    let mut s = ArmState::at_rest([0.2, 0.4]);
    let dt = 0.005;
    let tau = [3.0, -2.0];
    for _ in 0..100 {
        let next = step(&s, tau, dt, &p, &Perturbation::none()).unwrap().state;
        // Central difference in time at fixed joint velocity isolates the Jacobian.
        let h = 1e-7;
        let mut fwd = s;
        let mut bwd = s;
        for i in 0..2 {
            fwd.theta[i] += h * s.dtheta[i];
            bwd.theta[i] -= h * s.dtheta[i];
        }
        let (pf, pb) = (end_effector(&fwd, &p).pos, end_effector(&bwd, &p).pos);
        let v = end_effector(&s, &p).vel;
        let speed = v[0].hypot(v[1]).max(1.0);
        for k in 0..2 {
            let fd = (pf[k] - pb[k]) / (2.0 * h);
            assert!((fd - v[k]).abs() <= 1e-6 * speed, "{fd} vs {}", v[k]);
        }
        s = next;
    }
}

#[test]
fn unperturbed_rollouts_are_bit_identical() {
    let run = || {
        let p = ArmParams::default();
        let mut s = ArmState::at_rest([0.1, 0.2]);
        let mut out = Vec::new();
        for k in 0..300 {
            let tau = [(k as f64 * 0.01).sin() * 5.0, -2.0];
            s = step(&s, tau, 0.005, &p, &Perturbation::none()).unwrap().state;
            out.push((s.theta[0].to_bits(), s.theta[1].to_bits(), s.dtheta[0].to_bits()));
        }
        out
    };
    assert_eq!(run(), run());
}

proptest! {
    #[test]
    fn forward_dynamics_oracle_random_params(
        l1 in 0.2f64..0.5, l2 in 0.2f64..0.5, m1 in 0.5f64..4.0, m2 in 0.5f64..4.0,
        hand in 0.0f64..2.0, th1 in -3.0f64..3.0, th2 in -3.0f64..3.0,
        w1 in -5.0f64..5.0, w2 in -5.0f64..5.0,
    ) {
        let p = ArmParams { l1, l2, m1, m2, r1: l1 / 2.0, r2: l2 / 2.0, i1: m1 * l1 * l1 / 12.0,
            i2: m2 * l2 * l2 / 12.0, m_hand: hand, ..ArmParams::default() };
        let s = ArmState { theta: [th1, th2], dtheta: [w1, w2], pendulum: None, t: 0.0 };
        let acc = forward_dynamics(&s, [1.0, -1.0], &p).unwrap();
        prop_assert!(rel_err(acc, fd_lagrangian_accel(s.theta, s.dtheta, [1.0, -1.0], &p)) <= 1e-4);
    }
}
