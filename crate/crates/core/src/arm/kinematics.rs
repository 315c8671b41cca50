use super::params::{ArmParams, ArmState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandKinematics {
    /// `(x, z)` in the shoulder frame (m).
    pub pos: [f64; 2],
    /// `(xdot, zdot)` (m/s).
    pub vel: [f64; 2],
}

/// `d(x, z) / d(theta1, theta2)`, row-major.
pub fn hand_jacobian(theta: [f64; 2], p: &ArmParams) -> [[f64; 2]; 2] {
    let (s1, c1) = theta[0].sin_cos();
    let (s12, c12) = (theta[0] + theta[1]).sin_cos();
    [[-p.l1 * s1 - p.l2 * s12, -p.l2 * s12], [p.l1 * c1 + p.l2 * c12, p.l2 * c12]]
}

/// `Jdot * dtheta`, the velocity-product part of the hand acceleration.
pub(crate) fn hand_bias_acceleration(theta: [f64; 2], dtheta: [f64; 2], p: &ArmParams) -> [f64; 2] {
    let (s1, c1) = theta[0].sin_cos();
    let (s12, c12) = (theta[0] + theta[1]).sin_cos();
    let w1 = dtheta[0];
    let w12 = dtheta[0] + dtheta[1];
    [-p.l1 * c1 * w1 * w1 - p.l2 * c12 * w12 * w12, -p.l1 * s1 * w1 * w1 - p.l2 * s12 * w12 * w12]
}

/// Forward kinematics of the hand point.
pub fn end_effector(state: &ArmState, p: &ArmParams) -> HandKinematics {
    let (s1, c1) = state.theta[0].sin_cos();
    let (s12, c12) = (state.theta[0] + state.theta[1]).sin_cos();
    let j = hand_jacobian(state.theta, p);
    let v = state.dtheta;
    HandKinematics {
        pos: [p.l1 * c1 + p.l2 * c12, p.l1 * s1 + p.l2 * s12],
        vel: [j[0][0] * v[0] + j[0][1] * v[1], j[1][0] * v[0] + j[1][1] * v[1]],
    }
}
