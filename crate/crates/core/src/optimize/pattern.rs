use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineConfig {
    /// Initial coordinate step.
    pub trust_radius: f64,
    /// Floor for the step; polling continues at this radius.
    pub min_radius: f64,
    /// Objective evaluations, including the one at `x0`. The search always
    /// spends all of them, so equal budgets mean equal work.
    pub budget: usize,
    pub bounds: Option<(f64, f64)>,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self { trust_radius: 0.1, min_radius: 1e-4, budget: 50, bounds: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineResult {
    pub x: Vec<f64>,
    pub cost: f64,
    /// Cost at `x0`.
    pub initial_cost: f64,
    pub evaluations: usize,
}

/// Bounded coordinate pattern search with step halving down to
/// `min_radius`. The returned cost is never above `objective(x0)`; NaN trial
/// costs are rejected.
pub fn local_refine<F>(mut objective: F, x0: &[f64], config: &RefineConfig) -> Result<RefineResult>
where
    F: FnMut(&[f64]) -> f64,
{
    if config.budget < 1 {
        return Err(Error::InvalidParameter("refine budget must be >= 1".into()));
    }
    if !(config.trust_radius > 0.0) || !(config.min_radius > 0.0) {
        return Err(Error::InvalidParameter("trust radii must be > 0".into()));
    }
    if x0.is_empty() {
        return Err(Error::EmptyInput("x0"));
    }
    crate::error::ensure_finite(x0, "x0")?;
    if let Some((lo, hi)) = config.bounds {
        if x0.iter().any(|v| *v < lo || *v > hi) {
            return Err(Error::InvalidParameter("x0 outside bounds".into()));
        }
    }

    let clamp = |v: f64| config.bounds.map_or(v, |(lo, hi)| v.clamp(lo, hi));
    let mut x = x0.to_vec();
    let initial_cost = objective(&x);
    let mut cost = initial_cost;
    let mut evals = 1;
    let mut step = config.trust_radius;

    'outer: loop {
        let mut improved = false;
        let mut polled = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                if evals >= config.budget {
                    break 'outer;
                }
                let old = x[i];
                let trial = clamp(old + dir * step);
                if trial == old {
                    continue;
                }
                polled = true;
                x[i] = trial;
                let f = objective(&x);
                evals += 1;
                // A NaN start cost is replaced by any finite trial.
                if f < cost || (cost.is_nan() && !f.is_nan()) {
                    cost = f;
                    improved = true;
                    break;
                }
                x[i] = old;
            }
        }
        if !polled {
            // Every trial clamps back onto x: the box is degenerate.
            break;
        }
        if !improved {
            step = (0.5 * step).max(config.min_radius);
        }
    }

    Ok(RefineResult { x, cost, initial_cost, evaluations: evals })
}
