//! Oracles shared by the integration and acceptance suites. Everything here is
//! computed from first principles, independent of the library's closed forms.
#![allow(dead_code, clippy::needless_range_loop)]

use myoarm::arm::{step, ArmParams, ArmState, Perturbation};

/// Kinetic minus potential energy built from explicit point velocities.
pub fn lagrangian(q: [f64; 2], dq: [f64; 2], p: &ArmParams) -> f64 {
    let (s1, c1) = q[0].sin_cos();
    let (s12, c12) = (q[0] + q[1]).sin_cos();
    let w1 = dq[0];
    let w12 = dq[0] + dq[1];
    let com1 = [p.r1 * c1, p.r1 * s1];
    let v1 = [-p.r1 * s1 * w1, p.r1 * c1 * w1];
    let elbow = [p.l1 * c1, p.l1 * s1];
    let ve = [-p.l1 * s1 * w1, p.l1 * c1 * w1];
    let com2 = [elbow[0] + p.r2 * c12, elbow[1] + p.r2 * s12];
    let v2 = [ve[0] - p.r2 * s12 * w12, ve[1] + p.r2 * c12 * w12];
    let hand = [elbow[0] + p.l2 * c12, elbow[1] + p.l2 * s12];
    let vh = [ve[0] - p.l2 * s12 * w12, ve[1] + p.l2 * c12 * w12];
    let sq = |v: [f64; 2]| v[0] * v[0] + v[1] * v[1];
    let t = 0.5 * p.m1 * sq(v1)
        + 0.5 * p.i1 * w1 * w1
        + 0.5 * (p.m2 + p.m_extra) * sq(v2)
        + 0.5 * p.i2 * w12 * w12
        + 0.5 * p.m_hand * sq(vh);
    let v = p.g * (p.m1 * com1[1] + (p.m2 + p.m_extra) * com2[1] + p.m_hand * hand[1]);
    t - v
}

/// Joint accelerations from the Euler-Lagrange equations, with every
/// derivative of the Lagrangian taken numerically.
///
/// The kinetic energy is exactly quadratic in `dq`, so velocity derivatives
/// use unit steps (exact for quadratics); angle derivatives use central
/// differences with step `h = 1e-6`.
pub fn fd_lagrangian_accel(q: [f64; 2], dq: [f64; 2], tau: [f64; 2], p: &ArmParams) -> [f64; 2] {
    let h = 1e-6;
    let unit = |i: usize| if i == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
    let add = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
    // generalized momentum dL/d(dq_i)
    let momentum = |q: [f64; 2], dq: [f64; 2], i: usize| {
        (lagrangian(q, add(dq, unit(i), 1.0), p) - lagrangian(q, add(dq, unit(i), -1.0), p)) / 2.0
    };
    let mut mass = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            mass[i][j] = momentum(q, add(dq, unit(j), 1.0), i) - momentum(q, dq, i);
        }
    }
    let mut rhs = [0.0; 2];
    for i in 0..2 {
        let dl_dq = (lagrangian(add(q, unit(i), h), dq, p) - lagrangian(add(q, unit(i), -h), dq, p)) / (2.0 * h);
        // d/dt of the momentum along the motion, holding dq fixed
        let dp_dq = (momentum(add(q, dq, h), dq, i) - momentum(add(q, dq, -h), dq, i)) / (2.0 * h);
        rhs[i] = tau[i] + dl_dq - dp_dq;
    }
    let det = mass[0][0] * mass[1][1] - mass[0][1] * mass[1][0];
    [(mass[1][1] * rhs[0] - mass[0][1] * rhs[1]) / det, (mass[0][0] * rhs[1] - mass[1][0] * rhs[0]) / det]
}

/// Energy with the potential measured from the hanging configuration.
pub fn energy_above_rest(s: &ArmState, p: &ArmParams) -> f64 {
    -lagrangian(s.theta, [0.0; 2], p) + kinetic(s, p) + lagrangian(ArmState::hanging().theta, [0.0; 2], p)
}

fn kinetic(s: &ArmState, p: &ArmParams) -> f64 {
    lagrangian(s.theta, s.dtheta, p) - lagrangian(s.theta, [0.0; 2], p)
}

pub fn rel_err(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let n = (b[0] * b[0] + b[1] * b[1]).sqrt();
    d / n.max(1.0)
}

/// Sample mean and (n-1) standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Relative energy error of a passive swing released from the horizontal.
pub fn passive_energy_series(seconds: f64) -> Vec<f64> {
    let p = ArmParams::default();
    let mut s = ArmState::at_rest([0.0, 0.0]);
    let e0 = energy_above_rest(&s, &p);
    (0..(seconds / 0.005).round() as usize)
        .map(|_| {
            s = step(&s, [0.0; 2], 0.005, &p, &Perturbation::none()).unwrap().state;
            (energy_above_rest(&s, &p) - e0) / e0
        })
        .collect()
}

/// Least-squares trend of a series sampled at 0.005 s, per second.
pub fn trend_per_second(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = (n + 1.0) / 2.0 * 0.005;
    let my = xs.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, y) in xs.iter().enumerate() {
        let x = (k + 1) as f64 * 0.005;
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}
