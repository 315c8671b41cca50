use super::rollout::{rollout, simulate, RolloutResult, ZohPlan};
use super::scenario::Scenario;
use crate::actuation::Morphology;
use crate::error::Result;
use crate::optimize::{cma_es, CmaConfig, ControlParameterization, OptimizationTrace};
use crate::DIVERGED_COST;

#[derive(Debug, Clone)]
pub struct OpenLoopResult {
    pub best: RolloutResult,
    pub best_x: Vec<f64>,
    pub layout: ControlParameterization,
    pub trace: OptimizationTrace,
}

/// CMA-ES over a zero-order-hold control sequence of resolution `c`.
///
/// `cma.bounds` and `cma.initial_mean` are overridden by the morphology's
/// control bounds and their midpoint, so every morphology is optimized with
/// identical strategy settings.
pub fn open_loop_optimize(scn: &Scenario, morphology: Morphology, c: f64, cma: &CmaConfig) -> Result<OpenLoopResult> {
    scn.validate()?;
    let template = scn.initial_sim(morphology)?;
    let layout = ControlParameterization::new(
        scn.task.horizon(),
        c,
        template.controller.control_dim(),
        template.controller.control_bounds(),
    )?;
    let config = CmaConfig { bounds: Some(layout.bounds), initial_mean: Some(layout.midpoint()), ..cma.clone() };
    let steps = scn.horizon_steps();

    let objective = |x: &[f64]| {
        let plan = ZohPlan { layout: &layout, theta: x };
        match simulate(scn, &scn.perturbation, template.clone(), &plan, steps, false) {
            Ok(r) => r.cost,
            Err(e) => {
                log::warn!("rollout failed: {e}");
                DIVERGED_COST
            }
        }
    };
    let result = cma_es(objective, layout.dim(), &config)?;
    let best = rollout(scn, morphology, &ZohPlan { layout: &layout, theta: &result.best_x }, true)?;
    Ok(OpenLoopResult { best, best_x: result.best_x, layout, trace: result.trace })
}
