use super::rollout::RolloutResult;
use crate::error::{Error, Result};

/// Per-joint peak |tau| over the given rollouts.
pub fn calibrate_torque_limits(results: &[RolloutResult]) -> Result<[f64; 2]> {
    let mut peak = [0.0f64; 2];
    let mut seen = false;
    for tau in results.iter().flat_map(|r| &r.trajectory.tau) {
        seen = true;
        for j in 0..2 {
            peak[j] = peak[j].max(tau[j].abs());
        }
    }
    if !seen {
        return Err(Error::EmptyInput("muscle rollouts"));
    }
    Ok(peak)
}

/// Largest elbow excursion past the target angle, zero if never reached.
pub fn elbow_overshoot(theta: &[[f64; 2]], target: f64) -> f64 {
    theta.iter().map(|q| q[1] - target).fold(0.0, f64::max)
}
