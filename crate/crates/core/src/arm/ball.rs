use serde::{Deserialize, Serialize};

/// Point ball in the arm plane. `max_vz` tracks the largest upward velocity seen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallState {
    pub pos: [f64; 2],
    pub vel: [f64; 2],
    pub mass: f64,
    pub in_flight: bool,
    pub max_vz: f64,
}

impl BallState {
    /// A 250 g ball released from rest.
    pub fn dropped_at(pos: [f64; 2]) -> Self {
        Self { pos, vel: [0.0; 2], mass: 0.25, in_flight: true, max_vz: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BallContact {
    /// Hand-ball distance below which contact is resolved (m).
    pub radius: f64,
    pub restitution: f64,
    /// The ball leaves the scene below this height (m).
    pub floor_z: f64,
}

impl Default for BallContact {
    fn default() -> Self {
        Self { radius: 0.05, restitution: 1.0, floor_z: -2.0 }
    }
}

/// Free fall plus an instantaneous impulse against the hand.
///
/// The hand is treated as infinitely massive: only the ball's velocity
/// changes, and only when it approaches the hand along the contact normal.
pub fn ball_step(
    ball: &BallState,
    hand_pos: [f64; 2],
    hand_vel: [f64; 2],
    dt: f64,
    g: f64,
    contact: &BallContact,
) -> BallState {
    let mut b = *ball;
    if !b.in_flight {
        return b;
    }
    b.vel[1] -= g * dt;
    b.pos[0] += dt * b.vel[0];
    b.pos[1] += dt * b.vel[1];

    let d = [b.pos[0] - hand_pos[0], b.pos[1] - hand_pos[1]];
    let dist = d[0].hypot(d[1]);
    if dist < contact.radius && dist > 0.0 {
        let n = [d[0] / dist, d[1] / dist];
        let rel = (b.vel[0] - hand_vel[0]) * n[0] + (b.vel[1] - hand_vel[1]) * n[1];
        if rel < 0.0 {
            let j = (1.0 + contact.restitution) * rel;
            b.vel[0] -= j * n[0];
            b.vel[1] -= j * n[1];
        }
    }
    if b.pos[1] < contact.floor_z {
        b.in_flight = false;
    }
    b.max_vz = b.max_vz.max(b.vel[1]);
    b
}
