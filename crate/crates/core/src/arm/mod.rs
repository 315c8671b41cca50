//! Planar two-link arm moving against gravity.
//!
//! Angles: `theta[0]` is the shoulder angle measured counter-clockwise from
//! the horizontal `+x` axis, `theta[1]` the elbow angle relative to the upper
//! arm. The vertical axis is `z` (up). With both links hanging straight down
//! the configuration is `(-pi/2, 0)`.

mod ball;
mod dynamics;
mod integrate;
mod kinematics;
mod params;

pub use ball::{ball_step, BallContact, BallState};
pub use dynamics::{
    forward_dynamics, gravity_torque, kinetic_energy, mass_matrix, mechanical_energy, potential_energy,
};
pub use integrate::{reference_rk4_step, step, step_implicit, StepOutput};
pub use kinematics::{end_effector, hand_jacobian, HandKinematics};
pub use params::{ArmParams, ArmState, PendulumState, Perturbation, PerturbationKind};
