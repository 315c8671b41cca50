use std::fmt;
use std::str::FromStr;

use crate::actuation::{ActuatorParams, Controller, Morphology};
use crate::arm::{ArmParams, ArmState, BallContact, BallState, Perturbation};
use crate::error::{Error, Result};
use crate::objectives::{ObjectiveWeights, ReachTarget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    SmoothReach,
    PreciseReach,
    FastReach,
    BallServe,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::SmoothReach, Task::PreciseReach, Task::FastReach, Task::BallServe];

    /// Episode length in seconds.
    pub fn horizon(&self) -> f64 {
        match self {
            Task::SmoothReach | Task::BallServe => 0.9,
            // 1000 control steps of 0.01 s
            Task::PreciseReach | Task::FastReach => 10.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Task::SmoothReach => "smooth-reach",
            Task::PreciseReach => "precise-reach",
            Task::FastReach => "fast-reach",
            Task::BallServe => "ball-serve",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown task '{s}'")))
    }
}

/// Everything needed to simulate one task episode except the actuator choice.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub task: Task,
    pub arm: ArmParams,
    pub actuators: ActuatorParams,
    /// Applied to the plant; the prediction model sees `as_seen_by_model()`.
    pub perturbation: Perturbation,
    pub weights: ObjectiveWeights,
    pub target: ReachTarget,
    pub ball_drop: [f64; 2],
    pub contact: BallContact,
    pub dt: f64,
    pub initial: ArmState,
}

impl Scenario {
    pub fn new(task: Task) -> Self {
        Self {
            task,
            arm: ArmParams::default(),
            actuators: ActuatorParams::default(),
            perturbation: Perturbation::none(),
            weights: ObjectiveWeights::default(),
            target: ReachTarget::default(),
            ball_drop: [0.35, 0.2],
            contact: BallContact::default(),
            dt: 0.005,
            initial: ArmState::hanging(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.arm.validate()?;
        self.actuators.validate()?;
        self.perturbation.validate()?;
        self.weights.validate()?;
        if matches!(self.task, Task::PreciseReach | Task::FastReach) {
            self.target.validate(self.arm.reach(), WORKSPACE_MARGIN)?;
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if !self.initial.is_finite() || !self.ball_drop.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("initial state"));
        }
        Ok(())
    }

    pub fn horizon_steps(&self) -> usize {
        steps_for(self.task.horizon(), self.dt)
    }

    /// Fresh plant state and actuator for one episode.
    pub fn initial_sim(&self, morphology: Morphology) -> Result<SimState> {
        Ok(SimState {
            arm: self.initial,
            controller: Controller::new(morphology, &self.actuators)?,
            ball: (self.task == Task::BallServe).then(|| BallState::dropped_at(self.ball_drop)),
        })
    }
}

// Goals closer than this to full extension are rejected (m).
const WORKSPACE_MARGIN: f64 = 0.02;

pub fn steps_for(duration: f64, dt: f64) -> usize {
    (duration / dt).round().max(1.0) as usize
}

/// Full simulation state: arm, actuator internals and the ball, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub arm: ArmState,
    pub controller: Controller,
    pub ball: Option<BallState>,
}
