//! Task costs and rewards. Every function here is pure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scaling and weighting constants for all tasks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveWeights {
    /// Angle scaling per joint (rad).
    pub s_theta: [f64; 2],
    /// Angular velocity scaling per joint (rad/s).
    pub s_dtheta: [f64; 2],
    pub w_theta: f64,
    pub w_dtheta: f64,
    /// Weight of the squared jerk term.
    pub w_jerk: f64,
    pub reach_lambda1: f64,
    pub reach_lambda2: f64,
    pub reach_eps: f64,
    pub hop_lambda1: f64,
    pub hop_lambda2: f64,
    /// Gain applied to the COM velocity before clamping.
    pub hop_velocity_gain: f64,
    pub hop_velocity_clamp: f64,
    /// Distance to a joint limit that counts as "close" (rad).
    pub hop_joint_margin: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            s_theta: [2.45, 2.45],
            s_dtheta: [18.7, 27.9],
            w_theta: 2.0,
            w_dtheta: 1.0,
            w_jerk: 1.0,
            reach_lambda1: 0.1,
            reach_lambda2: 1e-4,
            reach_eps: 1e-4,
            hop_lambda1: 1e-4,
            hop_lambda2: 1e-3,
            hop_velocity_gain: 100.0,
            hop_velocity_clamp: 10.0,
            hop_joint_margin: 0.1,
        }
    }
}

impl ObjectiveWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.s_theta[0],
            self.s_theta[1],
            self.s_dtheta[0],
            self.s_dtheta[1],
            self.w_theta,
            self.w_dtheta,
            self.reach_lambda1,
            self.reach_lambda2,
            self.reach_eps,
            self.hop_lambda1,
            self.hop_lambda2,
            self.hop_velocity_gain,
            self.hop_velocity_clamp,
            self.hop_joint_margin,
        ];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) && self.w_jerk >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter("objective weights must be positive".into()))
        }
    }
}

/// Axis-aligned rectangle for goal sampling, in the shoulder frame (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalRect {
    pub x: [f64; 2],
    pub z: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReachTarget {
    /// Desired joint angles for smooth reaching (rad).
    pub theta_des: [f64; 2],
    pub dtheta_des: [f64; 2],
    /// Cartesian hand goal for precise and fast reaching (m).
    pub goal: [f64; 2],
    pub goal_rect: GoalRect,
}

impl Default for ReachTarget {
    fn default() -> Self {
        use std::f64::consts::FRAC_PI_2;
        Self {
            theta_des: [FRAC_PI_2, FRAC_PI_2],
            dtheta_des: [0.0; 2],
            goal: [0.25, 0.25],
            goal_rect: GoalRect { x: [0.1, 0.4], z: [0.1, 0.4] },
        }
    }
}

impl ReachTarget {
    /// Checks the Cartesian goal and the sampling rectangle lie within `reach - margin`.
    pub fn validate(&self, reach: f64, margin: f64) -> Result<()> {
        let r = self.goal_rect;
        let corners = [[r.x[0], r.z[0]], [r.x[0], r.z[1]], [r.x[1], r.z[0]], [r.x[1], r.z[1]], self.goal];
        if r.x[0] > r.x[1] || r.z[0] > r.z[1] {
            return Err(Error::InvalidParameter("goal rectangle bounds are reversed".into()));
        }
        if corners.iter().any(|c| c[0].hypot(c[1]) > reach - margin) {
            return Err(Error::InvalidParameter("reach goal outside the workspace".into()));
        }
        Ok(())
    }
}

/// One physics-rate sample of the smooth reaching trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReachSample {
    pub theta: [f64; 2],
    pub dtheta: [f64; 2],
    pub jerk: [f64; 2],
}

/// Joint jerk from accelerations sampled every `dt`: central differences
/// inside, one-sided at the ends.
pub fn jerk_from_accel(accel: &[[f64; 2]], dt: f64) -> Vec<[f64; 2]> {
    let n = accel.len();
    (0..n)
        .map(|k| {
            let (lo, hi) = (k.saturating_sub(1), (k + 1).min(n - 1));
            if hi == lo {
                return [0.0; 2];
            }
            let span = (hi - lo) as f64 * dt;
            [(accel[hi][0] - accel[lo][0]) / span, (accel[hi][1] - accel[lo][1]) / span]
        })
        .collect()
}

/// Per-sample smooth reaching error, summed over both joints.
pub fn smooth_reaching_term(s: &ReachSample, w: &ObjectiveWeights, target: &ReachTarget) -> f64 {
    (0..2)
        .map(|i| {
            let e = s.theta[i] - target.theta_des[i];
            let ev = s.dtheta[i] - target.dtheta_des[i];
            w.w_theta / w.s_theta[i] * e * e + w.w_dtheta / w.s_dtheta[i] * ev * ev + w.w_jerk * s.jerk[i] * s.jerk[i]
        })
        .sum()
}

/// Mean of [`smooth_reaching_term`] over a trajectory covering `horizon` seconds.
pub fn smooth_reaching_cost(
    samples: &[ReachSample],
    dt: f64,
    horizon: f64,
    w: &ObjectiveWeights,
    target: &ReachTarget,
) -> Result<f64> {
    let needed = (horizon / dt).round() as usize;
    if samples.is_empty() || samples.len() < needed {
        return Err(Error::TrajectoryTooShort { got: samples.len(), needed: needed.max(1) });
    }
    Ok(samples.iter().map(|s| smooth_reaching_term(s, w, target)).sum::<f64>() / samples.len() as f64)
}

/// Log-distance reward that keeps improving as the hand closes in on the goal.
pub fn precise_reaching_reward(d: f64, actions: &[f64], w: &ObjectiveWeights) -> f64 {
    let effort =
        if actions.is_empty() { 0.0 } else { actions.iter().map(|a| a * a).sum::<f64>() / actions.len() as f64 };
    -w.reach_lambda1 * (d - (d + w.reach_eps * w.reach_eps).ln()) - w.reach_lambda2 * effort - 2.0
}

/// Fast reaching ends once the hand is within 5 cm of the goal.
pub fn fast_reaching_done(d: f64) -> bool {
    d < 0.05
}

/// Negative peak upward ball velocity.
pub fn ball_serve_cost(ball_vz: &[f64]) -> Result<f64> {
    ball_vz.iter().copied().reduce(f64::max).map(|m| -m).ok_or(Error::EmptyInput("ball trajectory"))
}

/// Joint-limit indicator: -1 when within `margin` of either limit.
pub fn joint_limit_term(q: f64, q_min: f64, q_max: f64, margin: f64) -> f64 {
    if (q_max - q).abs() < margin || (q_min - q).abs() < margin {
        -1.0
    } else {
        0.0
    }
}

/// Hopping reward: exponential upward COM velocity term plus the alive,
/// action and joint-limit regularizers, with the signs as written in the
/// original reward (`r_alive - l1 r_action - l2 r_joint`).
pub fn hopping_reward(
    v_com_z: f64,
    actions: &[f64],
    q: &[f64],
    q_limits: &[(f64, f64)],
    alive: bool,
    w: &ObjectiveWeights,
) -> Result<f64> {
    if q.len() != q_limits.len() {
        return Err(Error::DimensionMismatch { expected: q_limits.len(), got: q.len() });
    }
    let v_hat = (w.hop_velocity_gain * v_com_z).min(w.hop_velocity_clamp);
    let velocity = v_hat.max(0.0).exp() - 1.0;
    let action =
        if actions.is_empty() { 0.0 } else { actions.iter().map(|a| a * a).sum::<f64>() / actions.len() as f64 };
    let joint: f64 =
        q.iter().zip(q_limits).map(|(&qi, &(lo, hi))| joint_limit_term(qi, lo, hi, w.hop_joint_margin)).sum();
    let alive = if alive { 1.0 } else { 0.0 };
    Ok(velocity + alive - w.hop_lambda1 * action - w.hop_lambda2 * joint)
}
