use super::params::{ArmParams, ArmState};
use crate::error::{ensure_finite, Result};

/// Joint-space mass matrix `M(theta)`; symmetric positive definite.
pub fn mass_matrix(theta: [f64; 2], p: &ArmParams) -> [[f64; 2]; 2] {
    let j1 = p.i1 + p.m1 * p.r1 * p.r1;
    let j2 = p.forearm_inertia_about_elbow();
    let s2 = p.forearm_first_moment();
    let c2 = theta[1].cos();
    let m11 = j1 + j2 + p.forearm_mass() * p.l1 * p.l1 + 2.0 * p.l1 * s2 * c2;
    let m12 = j2 + p.l1 * s2 * c2;
    [[m11, m12], [m12, j2]]
}

/// Coriolis and centrifugal torques `C(theta, dtheta) dtheta`.
pub(crate) fn velocity_torque(theta: [f64; 2], dtheta: [f64; 2], p: &ArmParams) -> [f64; 2] {
    let h = p.l1 * p.forearm_first_moment() * theta[1].sin();
    [-h * (2.0 * dtheta[0] * dtheta[1] + dtheta[1] * dtheta[1]), h * dtheta[0] * dtheta[0]]
}

/// Generalized gravity torques `G(theta) = dV/dtheta`.
pub fn gravity_torque(theta: [f64; 2], p: &ArmParams) -> [f64; 2] {
    let c1 = theta[0].cos();
    let c12 = (theta[0] + theta[1]).cos();
    let s2 = p.forearm_first_moment();
    [p.g * ((p.m1 * p.r1 + p.forearm_mass() * p.l1) * c1 + s2 * c12), p.g * s2 * c12]
}

pub(crate) fn solve2(m: [[f64; 2]; 2], b: [f64; 2]) -> [f64; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [(m[1][1] * b[0] - m[0][1] * b[1]) / det, (m[0][0] * b[1] - m[1][0] * b[0]) / det]
}

/// Joint accelerations solving `M(theta) ddtheta + C(theta, dtheta) dtheta + G(theta) = tau`.
///
/// Ignores any pendulum load carried in `state`; see [`super::step`] for the
/// coupled version.
pub fn forward_dynamics(state: &ArmState, tau: [f64; 2], params: &ArmParams) -> Result<[f64; 2]> {
    ensure_finite(&state.theta, "joint angles")?;
    ensure_finite(&state.dtheta, "joint velocities")?;
    ensure_finite(&tau, "joint torques")?;
    params.validate()?;
    Ok(unchecked_forward_dynamics(state.theta, state.dtheta, tau, params))
}

pub(crate) fn unchecked_forward_dynamics(theta: [f64; 2], dtheta: [f64; 2], tau: [f64; 2], p: &ArmParams) -> [f64; 2] {
    let m = mass_matrix(theta, p);
    let c = velocity_torque(theta, dtheta, p);
    let g = gravity_torque(theta, p);
    solve2(m, [tau[0] - c[0] - g[0], tau[1] - c[1] - g[1]])
}

pub fn kinetic_energy(state: &ArmState, p: &ArmParams) -> f64 {
    let m = mass_matrix(state.theta, p);
    let v = state.dtheta;
    0.5 * (m[0][0] * v[0] * v[0] + 2.0 * m[0][1] * v[0] * v[1] + m[1][1] * v[1] * v[1])
}

/// Potential energy with zero at shoulder height.
pub fn potential_energy(state: &ArmState, p: &ArmParams) -> f64 {
    let s1 = state.theta[0].sin();
    let s12 = (state.theta[0] + state.theta[1]).sin();
    p.g * ((p.m1 * p.r1 + p.forearm_mass() * p.l1) * s1 + p.forearm_first_moment() * s12)
}

pub fn mechanical_energy(state: &ArmState, p: &ArmParams) -> f64 {
    kinetic_energy(state, p) + potential_energy(state, p)
}
