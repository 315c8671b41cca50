use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Result};

pub(crate) fn clamp_unit(u: f64, what: &str) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        log::warn!("{what} {u} outside [0, 1], clamping");
    }
    u.clamp(0.0, 1.0)
}

/// One explicit Euler step of `da/dt = (u - a) / time_constant`, clamped to `[0, 1]`.
pub fn activation_step(a: f64, u: f64, dt: f64, time_constant: f64) -> f64 {
    let u = clamp_unit(u, "muscle control");
    (a + dt / time_constant * (u - a)).clamp(0.0, 1.0)
}

/// Calcium-based activation: `dgamma/dt = rate (u - gamma)` followed by the
/// length-dependent nonlinear map to activity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HatzeParams {
    /// `M_H` (1/s).
    pub rate: f64,
    /// Exponent `nu`.
    pub nu: f64,
    /// Resting activity `a_0`.
    pub a0: f64,
    /// `gamma_c * rho_0 / l_opt`, so that `rho(l) = rho_coeff * l`.
    pub rho_coeff: f64,
}

impl Default for HatzeParams {
    fn default() -> Self {
        Self { rate: 11.3, nu: 3.0, a0: 0.005, rho_coeff: 5.27 }
    }
}

/// Activity for a calcium concentration `gamma` at fiber length `l_ce`.
pub fn hatze_activation(gamma: f64, l_ce: f64, p: &HatzeParams) -> f64 {
    let w = (gamma * p.rho_coeff * l_ce).max(0.0).powf(p.nu);
    ((p.a0 + w) / (1.0 + w)).clamp(0.0, 1.0)
}

/// Advances `gamma` by one explicit Euler step and returns `(gamma', a)`.
pub fn hatze_activation_step(gamma: f64, u: f64, l_ce: f64, dt: f64, p: &HatzeParams) -> Result<(f64, f64)> {
    ensure_finite(&[gamma, u, l_ce, dt], "hatze activation input")?;
    let u = clamp_unit(u, "muscle control");
    let next = (gamma + dt * p.rate * (u - gamma)).clamp(0.0, 1.0);
    Ok((next, hatze_activation(next, l_ce, p)))
}
