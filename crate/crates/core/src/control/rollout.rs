use std::time::{Duration, Instant};

use super::scenario::{Scenario, SimState, Task};
use crate::arm::{ball_step, end_effector, step_implicit, Perturbation};
use crate::error::{Error, Result};
use crate::objectives::{
    fast_reaching_done, jerk_from_accel, precise_reaching_reward, smooth_reaching_cost, ReachSample,
};
use crate::optimize::ControlParameterization;
use crate::DIVERGED_COST;

/// Control signal as a function of time since rollout start.
pub trait ControlSource {
    fn dim(&self) -> usize;
    fn control_at(&self, t: f64, out: &mut [f64]) -> Result<()>;
}

/// A decision vector read through its zero-order-hold layout.
#[derive(Debug, Clone, Copy)]
pub struct ZohPlan<'a> {
    pub layout: &'a ControlParameterization,
    pub theta: &'a [f64],
}

impl ControlSource for ZohPlan<'_> {
    fn dim(&self) -> usize {
        self.layout.n_actuators
    }

    fn control_at(&self, t: f64, out: &mut [f64]) -> Result<()> {
        // Past the plan's end the last segment is held.
        self.layout.decode_into(self.theta, t.min(self.layout.horizon - 0.5 * self.layout.resolution), out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantControl(pub Vec<f64>);

impl ControlSource for ConstantControl {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn control_at(&self, _t: f64, out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(&self.0);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Horizon,
    GoalReached { t: f64 },
    Diverged { t: f64 },
}

impl Termination {
    pub fn diverged(&self) -> bool {
        matches!(self, Termination::Diverged { .. })
    }
}

/// Physics-rate samples. Row `k` holds the state after step `k`, the control
/// and torque applied during it, and the resulting joint acceleration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub theta: Vec<[f64; 2]>,
    pub dtheta: Vec<[f64; 2]>,
    pub accel: Vec<[f64; 2]>,
    pub u: Vec<Vec<f64>>,
    pub tau: Vec<[f64; 2]>,
    /// Actuator internal state (muscle activities or filtered commands).
    pub activity: Vec<Vec<f64>>,
    pub hand: Vec<[f64; 2]>,
    pub ball_vz: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct RolloutResult {
    pub trajectory: Trajectory,
    /// Task cost, or [`DIVERGED_COST`] on divergence.
    pub cost: f64,
    pub termination: Termination,
    pub steps: usize,
    pub wall_time: Duration,
    pub final_state: SimState,
}

impl RolloutResult {
    /// Divergence is read from the termination and the exact sentinel value,
    /// never from cost magnitude: finite costs can exceed the sentinel.
    pub fn diverged(&self) -> bool {
        self.termination.diverged() || self.cost == DIVERGED_COST
    }
}

/// Running cost of one task episode.
#[derive(Debug, Clone)]
pub(crate) struct CostAccumulator {
    task: Task,
    horizon_steps: usize,
    samples: Vec<ReachSample>,
    accel: Vec<[f64; 2]>,
    reward_sum: f64,
    ball_vz: Vec<f64>,
}

impl CostAccumulator {
    pub(crate) fn new(task: Task, horizon_steps: usize, ball_vz0: Option<f64>) -> Self {
        Self {
            task,
            horizon_steps,
            samples: Vec::with_capacity(horizon_steps),
            accel: Vec::with_capacity(horizon_steps),
            reward_sum: 0.0,
            ball_vz: ball_vz0.into_iter().collect(),
        }
    }

    /// Records one step; returns true if the task terminates early.
    pub(crate) fn push(&mut self, scn: &Scenario, sim: &SimState, accel: [f64; 2], u: &[f64]) -> bool {
        match self.task {
            Task::SmoothReach => {
                self.samples.push(ReachSample { theta: sim.arm.theta, dtheta: sim.arm.dtheta, jerk: [0.0; 2] });
                self.accel.push(accel);
                false
            }
            Task::PreciseReach | Task::FastReach => {
                let d = goal_distance(scn, sim);
                self.reward_sum += precise_reaching_reward(d, u, &scn.weights);
                self.task == Task::FastReach && fast_reaching_done(d)
            }
            Task::BallServe => {
                if let Some(b) = &sim.ball {
                    self.ball_vz.push(b.vel[1]);
                }
                false
            }
        }
    }

    pub(crate) fn finish(mut self, scn: &Scenario) -> Result<f64> {
        let dt = scn.dt;
        match self.task {
            Task::SmoothReach => {
                let jerk = jerk_from_accel(&self.accel, dt);
                for (s, j) in self.samples.iter_mut().zip(jerk) {
                    s.jerk = j;
                }
                smooth_reaching_cost(&self.samples, dt, self.horizon_steps as f64 * dt, &scn.weights, &scn.target)
            }
            Task::PreciseReach | Task::FastReach => Ok(-self.reward_sum / self.horizon_steps as f64),
            Task::BallServe => crate::objectives::ball_serve_cost(&self.ball_vz),
        }
    }
}

fn goal_distance(scn: &Scenario, sim: &SimState) -> f64 {
    let hand = end_effector(&sim.arm, &scn.arm).pos;
    (hand[0] - scn.target.goal[0]).hypot(hand[1] - scn.target.goal[1])
}

/// One physics step of arm, actuator and ball. Returns the applied torque and
/// the joint acceleration.
pub(crate) fn advance(
    scn: &Scenario,
    perturbation: &Perturbation,
    sim: &mut SimState,
    u: &[f64],
) -> Result<([f64; 2], [f64; 2])> {
    let (tau, damping) = sim.controller.actuate_linearized(u, &sim.arm, scn.dt)?;
    let out = step_implicit(&sim.arm, tau, damping, scn.dt, &scn.arm, perturbation)?;
    sim.arm = out.state;
    if let Some(ball) = &mut sim.ball {
        let hand = end_effector(&sim.arm, &perturbation.apply(&scn.arm));
        *ball = ball_step(ball, hand.pos, hand.vel, scn.dt, scn.arm.g, &scn.contact);
    }
    Ok((out.actuator_torque, out.accel))
}

/// Simulates `steps` physics steps from `sim` under `perturbation`, reading
/// controls from `source` at local time `k dt`. Divergence yields the
/// sentinel cost rather than an error; dimension mismatches are errors.
pub fn simulate(
    scn: &Scenario,
    perturbation: &Perturbation,
    mut sim: SimState,
    source: &dyn ControlSource,
    steps: usize,
    record: bool,
) -> Result<RolloutResult> {
    if source.dim() != sim.controller.control_dim() {
        return Err(Error::DimensionMismatch { expected: sim.controller.control_dim(), got: source.dim() });
    }
    let start = Instant::now();
    let mut acc = CostAccumulator::new(scn.task, steps, sim.ball.map(|b| b.vel[1]));
    let mut traj = Trajectory::default();
    let mut u = vec![0.0; source.dim()];
    let mut termination = Termination::Horizon;
    let mut taken = 0;

    for k in 0..steps {
        source.control_at(k as f64 * scn.dt, &mut u)?;
        let (tau, accel) = match advance(scn, perturbation, &mut sim, &u) {
            Ok(r) => r,
            Err(Error::Diverged { t }) => {
                termination = Termination::Diverged { t };
                break;
            }
            Err(e) => return Err(e),
        };
        taken += 1;
        if record {
            record_row(&mut traj, scn, perturbation, &sim, &u, tau, accel);
        }
        if acc.push(scn, &sim, accel, &u) {
            termination = Termination::GoalReached { t: sim.arm.t };
            break;
        }
    }

    let cost = match termination {
        Termination::Diverged { .. } => DIVERGED_COST,
        _ => {
            let c = acc.finish(scn)?;
            if c.is_finite() {
                c
            } else {
                DIVERGED_COST
            }
        }
    };
    Ok(RolloutResult {
        trajectory: traj,
        cost,
        termination,
        steps: taken,
        wall_time: start.elapsed(),
        final_state: sim,
    })
}

pub(crate) fn record_row(
    traj: &mut Trajectory,
    scn: &Scenario,
    perturbation: &Perturbation,
    sim: &SimState,
    u: &[f64],
    tau: [f64; 2],
    accel: [f64; 2],
) {
    traj.t.push(sim.arm.t);
    traj.theta.push(sim.arm.theta);
    traj.dtheta.push(sim.arm.dtheta);
    traj.accel.push(accel);
    traj.u.push(u.to_vec());
    traj.tau.push(tau);
    traj.activity.push(sim.controller.internal_state().to_vec());
    traj.hand.push(end_effector(&sim.arm, &perturbation.apply(&scn.arm)).pos);
    if let Some(b) = &sim.ball {
        traj.ball_vz.push(b.vel[1]);
    }
}

/// A full task episode on the true plant from the scenario's initial state.
pub fn rollout(
    scn: &Scenario,
    morphology: crate::actuation::Morphology,
    source: &dyn ControlSource,
    record: bool,
) -> Result<RolloutResult> {
    scn.validate()?;
    let sim = scn.initial_sim(morphology)?;
    simulate(scn, &scn.perturbation, sim, source, scn.horizon_steps(), record)
}
