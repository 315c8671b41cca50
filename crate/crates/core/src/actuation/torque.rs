use serde::{Deserialize, Serialize};

/// Time scale of the fast low-pass torque variant (s).
pub const LOWPASS_FAST: f64 = 0.01;
/// Time scale of the slow low-pass torque variant (s).
pub const LOWPASS_SLOW: f64 = 1.0;

/// Ideal torque source, `tau = tau_max * u` for `u` in `[-1, 1]`.
pub fn torque_actuator(u: f64, tau_max: f64) -> f64 {
    if !(-1.0..=1.0).contains(&u) {
        log::warn!("torque control {u} outside [-1, 1], clamping");
    }
    tau_max * u.clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdGains {
    /// Per radian of angle error, in normalized torque units.
    pub kp: f64,
    /// Per rad/s, in normalized torque units.
    pub kd: f64,
}

impl Default for PdGains {
    fn default() -> Self {
        Self { kp: 5.0, kd: 0.5 }
    }
}

/// Normalized torque command `kp (q_hat - q) - kd dq`, clamped to `[-1, 1]`.
/// The desired velocity is zero.
pub fn pd_control(q: f64, dq: f64, q_hat: f64, kp: f64, kd: f64) -> f64 {
    (kp * (q_hat - q) + kd * (0.0 - dq)).clamp(-1.0, 1.0)
}

/// `a + dt / time_scale * (u - a)`.
pub fn lowpass_step(a: f64, u: f64, dt: f64, time_scale: f64) -> f64 {
    a + dt / time_scale * (u - a)
}
