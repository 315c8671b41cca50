use std::time::Instant;

use super::rollout::{advance, record_row, simulate, CostAccumulator, RolloutResult, Termination, Trajectory, ZohPlan};
use super::scenario::{steps_for, Scenario};
use crate::actuation::Morphology;
use crate::error::{Error, Result};
use crate::optimize::{cma_es, local_refine, CmaConfig, ControlParameterization, OptimizationTrace, RefineConfig};
use crate::DIVERGED_COST;

#[derive(Debug, Clone, PartialEq)]
pub struct MpcConfig {
    /// Prediction horizon (s).
    pub t_pred: f64,
    /// Control resolution of the plan (s).
    pub resolution: f64,
    /// Budget of the single CMA-ES run before the loop.
    pub warm_start: CmaConfig,
    /// Evaluations per control step, including the one at the shifted plan.
    pub refine_budget: usize,
    /// Initial pattern-search step as a fraction of the control range.
    pub refine_radius: f64,
    pub refine_min_radius: f64,
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self {
            t_pred: 0.3,
            resolution: 0.01,
            warm_start: CmaConfig { generations: 20, ..CmaConfig::default() },
            refine_budget: 50,
            refine_radius: 0.1,
            refine_min_radius: 1e-3,
        }
    }
}

impl MpcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0) || !(self.t_pred >= self.resolution) {
            return Err(Error::InvalidParameter(format!(
                "need t_pred >= c > 0, got t_pred = {}, c = {}",
                self.t_pred, self.resolution
            )));
        }
        if self.refine_budget < 1 {
            return Err(Error::InvalidParameter("refine budget must be >= 1".into()));
        }
        if !(self.refine_radius > 0.0) || !(self.refine_min_radius > 0.0) {
            return Err(Error::InvalidParameter("refine radii must be > 0".into()));
        }
        self.warm_start.validate()
    }

    /// Objective evaluations one MPC episode of `control_steps` will use.
    pub fn evaluation_budget(&self, control_steps: usize) -> usize {
        self.warm_start.population * self.warm_start.generations + control_steps * self.refine_budget
    }
}

/// One receding-horizon iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MpcStep {
    pub t: f64,
    /// Cost of the shifted warm-start plan on the prediction model.
    pub shifted_cost: f64,
    /// Cost of the refined plan on the prediction model.
    pub plan_cost: f64,
    /// First element of the refined plan, as applied to the plant.
    pub applied: Vec<f64>,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct MpcResult {
    /// Executed plant trajectory; its cost is the task cost of that trajectory.
    pub executed: RolloutResult,
    pub steps: Vec<MpcStep>,
    pub warm_start: OptimizationTrace,
    pub evaluations: usize,
}

fn shift_plan(plan: &mut [f64], n_a: usize) {
    plan.copy_within(n_a.., 0);
    let len = plan.len();
    if len >= 2 * n_a {
        plan.copy_within(len - 2 * n_a..len - n_a, len - n_a);
    }
}

/// Receding-horizon control of the true plant. The prediction model shares
/// the plant's arm and actuator state but only sees visible perturbations.
/// Plant divergence stops the loop and returns the partial trajectory with
/// the sentinel cost.
pub fn mpc_run(scn: &Scenario, morphology: Morphology, config: &MpcConfig) -> Result<MpcResult> {
    scn.validate()?;
    config.validate()?;
    let start = Instant::now();
    let mut sim = scn.initial_sim(morphology)?;
    let n_a = sim.controller.control_dim();
    let layout = ControlParameterization::new(config.t_pred, config.resolution, n_a, sim.controller.control_bounds())?;
    let model_perturbation = scn.perturbation.as_seen_by_model();
    let pred_steps = steps_for(layout.n_segments() as f64 * config.resolution, scn.dt);
    let steps_per_control = steps_for(config.resolution, scn.dt);
    let total_steps = scn.horizon_steps();
    let control_steps = total_steps.div_ceil(steps_per_control);

    let predict = |state: &super::scenario::SimState, x: &[f64]| -> f64 {
        let plan = ZohPlan { layout: &layout, theta: x };
        match simulate(scn, &model_perturbation, state.clone(), &plan, pred_steps, false) {
            Ok(r) => r.cost,
            Err(e) => {
                log::warn!("prediction rollout failed: {e}");
                DIVERGED_COST
            }
        }
    };

    let warm_cfg =
        CmaConfig { bounds: Some(layout.bounds), initial_mean: Some(layout.midpoint()), ..config.warm_start.clone() };
    let warm = cma_es(|x: &[f64]| predict(&sim, x), layout.dim(), &warm_cfg)?;
    let mut plan = warm.best_x;
    let mut evaluations = warm.trace.total_evaluations();

    let width = layout.bounds.1 - layout.bounds.0;
    let refine_cfg = RefineConfig {
        trust_radius: config.refine_radius * width,
        min_radius: config.refine_min_radius * width,
        budget: config.refine_budget,
        bounds: Some(layout.bounds),
    };

    let mut acc = CostAccumulator::new(scn.task, total_steps, sim.ball.map(|b| b.vel[1]));
    let mut traj = Trajectory::default();
    let mut mpc_steps = Vec::with_capacity(control_steps);
    let mut termination = Termination::Horizon;
    let mut taken = 0;

    'outer: for k in 0..control_steps {
        if k > 0 {
            shift_plan(&mut plan, n_a);
        }
        let refined = local_refine(|x: &[f64]| predict(&sim, x), &plan, &refine_cfg)?;
        evaluations += refined.evaluations;
        plan = refined.x;
        let applied = layout.decode(&plan, 0.0)?;
        mpc_steps.push(MpcStep {
            t: sim.arm.t,
            shifted_cost: refined.initial_cost,
            plan_cost: refined.cost,
            applied: applied.clone(),
            evaluations: refined.evaluations,
        });

        for _ in 0..steps_per_control.min(total_steps - taken) {
            let (tau, accel) = match advance(scn, &scn.perturbation, &mut sim, &applied) {
                Ok(r) => r,
                Err(Error::Diverged { t }) => {
                    termination = Termination::Diverged { t };
                    break 'outer;
                }
                Err(e) => return Err(e),
            };
            taken += 1;
            record_row(&mut traj, scn, &scn.perturbation, &sim, &applied, tau, accel);
            if acc.push(scn, &sim, accel, &applied) {
                termination = Termination::GoalReached { t: sim.arm.t };
                break 'outer;
            }
        }
    }

    let cost = match termination {
        Termination::Diverged { .. } => DIVERGED_COST,
        _ => acc.finish(scn).map(|c| if c.is_finite() { c } else { DIVERGED_COST })?,
    };
    let executed = RolloutResult {
        trajectory: traj,
        cost,
        termination,
        steps: taken,
        wall_time: start.elapsed(),
        final_state: sim,
    };
    Ok(MpcResult { executed, steps: mpc_steps, warm_start: warm.trace, evaluations })
}
