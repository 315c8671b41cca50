//! Derivative-free optimizers and the decision-vector layout they search over.

mod cma;
mod pattern;
mod zoh;

pub use cma::{cma_es, CmaConfig, CmaResult, GenerationStats, OptimizationTrace};
pub use pattern::{local_refine, RefineConfig, RefineResult};
pub use zoh::ControlParameterization;
