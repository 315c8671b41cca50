//! Open-loop optimal control and receding-horizon MPC over the simulated arm.

mod calibrate;
mod mpc;
mod open_loop;
mod rollout;
mod scenario;

pub use calibrate::{calibrate_torque_limits, elbow_overshoot};
pub use mpc::{mpc_run, MpcConfig, MpcResult, MpcStep};
pub use open_loop::{open_loop_optimize, OpenLoopResult};
pub use rollout::{rollout, simulate, ConstantControl, ControlSource, RolloutResult, Termination, Trajectory, ZohPlan};
pub use scenario::{steps_for, Scenario, SimState, Task};
