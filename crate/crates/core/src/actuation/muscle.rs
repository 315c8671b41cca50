use serde::{Deserialize, Serialize};

use super::curves::{force_length, force_velocity, force_velocity_slope, passive_force};
use crate::error::{Error, Result};

/// Regularizer in the angle-to-length map denominators.
pub const LENGTH_MAP_EPSILON: f64 = 0.01;

/// Parameters shared by every muscle of the arm. Each joint carries one
/// antagonistic pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MuscleParams {
    /// Joint angle mapped to the shortest length of muscle 1 (rad), per joint.
    pub phi_min: [f64; 2],
    /// Joint angle mapped to the longest length of muscle 1 (rad), per joint.
    pub phi_max: [f64; 2],
    pub l_min: f64,
    pub l_max: f64,
    /// Maximum isometric force (N).
    pub f_max: f64,
    /// Activation time constant (s).
    pub activation_time: f64,
    pub v_scale: f64,
}

impl Default for MuscleParams {
    fn default() -> Self {
        use std::f64::consts::FRAC_PI_2;
        Self {
            phi_min: [-FRAC_PI_2; 2],
            phi_max: [FRAC_PI_2; 2],
            l_min: 0.75,
            l_max: 1.05,
            f_max: 295.0,
            activation_time: 0.01,
            v_scale: 0.5,
        }
    }
}

impl MuscleParams {
    pub fn validate(&self) -> Result<()> {
        for j in 0..2 {
            derive_linear_map(self.phi_min[j], self.phi_max[j], self.l_min, self.l_max)?;
        }
        if !(self.f_max > 0.0) || !(self.activation_time > 0.0) || !self.v_scale.is_finite() {
            return Err(Error::InvalidParameter("muscle f_max and activation_time must be > 0".into()));
        }
        Ok(())
    }

    pub fn linear_maps(&self) -> Result<[LinearMap; 2]> {
        Ok([
            derive_linear_map(self.phi_min[0], self.phi_max[0], self.l_min, self.l_max)?,
            derive_linear_map(self.phi_min[1], self.phi_max[1], self.l_min, self.l_max)?,
        ])
    }
}

/// Moment arms and reference lengths of one antagonistic pair:
/// `l_CE,i = m_i * phi + l_ref,i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMap {
    pub m: [f64; 2],
    pub l_ref: [f64; 2],
}

/// Solves for the pair's moment arms and reference lengths so that muscle 1
/// spans `[l_min, l_max]` as the joint moves from `phi_min` to `phi_max` and
/// muscle 2 the reverse (up to the epsilon regularizer).
pub fn derive_linear_map(phi_min: f64, phi_max: f64, l_min: f64, l_max: f64) -> Result<LinearMap> {
    if !(phi_max > phi_min) || !phi_min.is_finite() || !phi_max.is_finite() {
        return Err(Error::InvalidParameter(format!("need phi_max > phi_min, got [{phi_min}, {phi_max}]")));
    }
    if !(l_max > l_min && l_min > 0.0) || !l_max.is_finite() {
        return Err(Error::InvalidParameter(format!("need l_max > l_min > 0, got [{l_min}, {l_max}]")));
    }
    let eps = LENGTH_MAP_EPSILON;
    let m1 = (l_max - l_min) / (phi_max - phi_min + eps);
    let m2 = (l_max - l_min) / (phi_min - phi_max + eps);
    Ok(LinearMap { m: [m1, m2], l_ref: [l_min - m1 * phi_min, l_min - m2 * phi_max] })
}

/// Fiber length and velocity of one muscle.
pub fn fiber_kinematics(phi: f64, dphi: f64, m: f64, l_ref: f64) -> (f64, f64) {
    (m * phi + l_ref, m * dphi)
}

/// Switches that replace individual muscle properties by their neutral value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AblationFlags {
    pub disable_fl: bool,
    pub disable_fv: bool,
    pub disable_activation: bool,
}

impl AblationFlags {
    pub fn any(&self) -> bool {
        self.disable_fl || self.disable_fv || self.disable_activation
    }
}

/// Net torque of an antagonistic pair, `tau = -(m_1 F_1 + m_2 F_2)` with
/// `F_i = [FL(l_i) FV(v_scale dl_i) a_i + FP(l_i)] F_max`.
pub fn muscle_joint_torque(
    phi: f64,
    dphi: f64,
    activities: [f64; 2],
    map: &LinearMap,
    f_max: f64,
    v_scale: f64,
    flags: AblationFlags,
) -> f64 {
    let mut tau = 0.0;
    for i in 0..2 {
        let (l, dl) = fiber_kinematics(phi, dphi, map.m[i], map.l_ref[i]);
        let fl = if flags.disable_fl { 1.0 } else { force_length(l) };
        let fv = if flags.disable_fv { 1.0 } else { force_velocity(v_scale * dl) };
        let force = (fl * fv * activities[i] + passive_force(l)) * f_max;
        tau -= map.m[i] * force;
    }
    tau
}

/// `-d tau / d dphi` of [`muscle_joint_torque`]; never negative.
pub fn muscle_joint_damping(
    phi: f64,
    dphi: f64,
    activities: [f64; 2],
    map: &LinearMap,
    f_max: f64,
    v_scale: f64,
    flags: AblationFlags,
) -> f64 {
    if flags.disable_fv {
        return 0.0;
    }
    (0..2)
        .map(|i| {
            let (l, dl) = fiber_kinematics(phi, dphi, map.m[i], map.l_ref[i]);
            let fl = if flags.disable_fl { 1.0 } else { force_length(l) };
            map.m[i] * map.m[i] * f_max * fl * activities[i] * v_scale * force_velocity_slope(v_scale * dl)
        })
        .sum()
}
