//! Actuator morphologies: the antagonistic muscle pair and the torque family.

mod activation;
mod controller;
mod curves;
mod muscle;
mod torque;

pub use activation::{activation_step, hatze_activation, hatze_activation_step, HatzeParams};
pub use controller::{ActivationModel, ActuatorParams, Controller, Morphology, DEFAULT_TAU_MAX};
pub use curves::{flv_curves, force_length, force_velocity, force_velocity_slope, passive_force, FV_ECCENTRIC_MAX};
pub use muscle::{
    derive_linear_map, fiber_kinematics, muscle_joint_damping, muscle_joint_torque, AblationFlags, LinearMap,
    MuscleParams, LENGTH_MAP_EPSILON,
};
pub use torque::{lowpass_step, pd_control, torque_actuator, PdGains, LOWPASS_FAST, LOWPASS_SLOW};
