//! Two-link arm simulation and derivative-free optimization benchmark for
//! comparing actuator morphologies.
//!
//! The crate is organised bottom-up:
//!
//! * [`arm`] planar 2-link rigid-body dynamics, integration, loads and the serve ball.
//! * [`actuation`] muscle pair model, activation dynamics, torque, PD and low-pass actuators.
//! * [`objectives`] task costs and rewards.
//! * [`optimize`] CMA-ES, bounded pattern search and the zero-order-hold control layout.
//! * [`control`] rollouts, open-loop optimal control, receding-horizon MPC, torque calibration.
//! * [`harness`] experiment configs, sweeps, CSV output and summaries.
//! * [`cli`] the `myoarm` command line.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Joint-indexed loops mirror the per-joint equations.
#![allow(clippy::needless_range_loop)]

pub mod actuation;
pub mod arm;
pub mod cli;
pub mod control;
pub mod error;
pub mod harness;
pub mod objectives;
pub mod optimize;

pub use error::{Error, Result};

/// Cost substituted for rollouts whose state became non-finite.
pub const DIVERGED_COST: f64 = 1e9;

/// Return substituted for diverged rollouts of reward-maximising tasks.
pub const DIVERGED_RETURN: f64 = -1e9;
